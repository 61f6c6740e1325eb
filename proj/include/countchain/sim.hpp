#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "countchain/node.hpp"
#include "countchain/protocol.hpp"
#include "countchain/types.hpp"

namespace countchain {

struct ScenarioSpec {
    SystemConfig system;
    double honesty_rate = 1.0;        // every uncorrupted node
    double corrupted_fraction = 0.0;  // corrupted nodes act with honesty 0
    int num_events = 1000;
    double event_rate = 10.0;  // events per simulated second, fixed cadence
    std::uint64_t seed = 0;
    DishonestAction dishonest_action = DishonestAction::VoteFalse;
    double packet_loss = 0.0;  // per node, per event
    StakeUnits initial_stake = 1000;
    int distribute_every = 0;  // resolutions between prize payouts; 0 = once, at end of run
    bool record_wall_time = false;
};

void validate(const ScenarioSpec& spec);

struct ScenarioMetrics {
    std::int64_t propositions_raised = 0;
    std::int64_t decided_true = 0;
    std::int64_t decided_false = 0;
    std::int64_t events_unraised = 0;
    std::int64_t counter = 0;
    std::int64_t corrupted_nodes = 0;
    std::int64_t tie_breaks = 0;
    double mean_hash_evals_per_verifier = 0.0;
    double wall_time_ms = 0.0;  // informational; zero unless requested

    /// No proposition raised, or none decided True.
    bool full_success() const { return decided_true == 0 || propositions_raised == 0; }
    /// At most half of the raised propositions decided True.
    bool partial_success() const { return 2 * decided_true <= propositions_raised; }
};

/// Called after every resolution with the host state at that instant.
using ResolutionObserver = std::function<void(const Host&, const Outcome&)>;

/// Runs one full scenario on the simulated clock. Deterministic in `spec`.
ScenarioMetrics run_scenario(const ScenarioSpec& spec, const ResolutionObserver& observer = {});

struct SweepGrid {
    std::vector<double> honesty;
    std::vector<int> verifiers;
    std::vector<int> nodes;

    std::size_t size() const { return honesty.size() * verifiers.size() * nodes.size(); }
};

struct SweepRow {
    ScenarioSpec spec;
    ScenarioMetrics metrics;
};

/// One scenario per grid point, honesty outermost and node count innermost.
/// Row i runs with seed = base.seed ^ i. `jobs` caps worker threads; row
/// order never depends on it.
std::vector<SweepRow> run_sweep(const SweepGrid& grid, const ScenarioSpec& base, int jobs = 1);

/// One scenario per (UNHR, corrupted fraction) pair, UNHR outermost.
std::vector<SweepRow> run_sybil_experiment(const ScenarioSpec& base, std::span<const double> corrupted_fractions,
                                           std::span<const double> uncorrupted_honesty, int jobs = 1);

/// Runs prepared specs in parallel, preserving order.
std::vector<SweepRow> run_specs(std::vector<ScenarioSpec> specs, int jobs);

void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const SweepRow& row);
void write_csv(std::ostream& os, std::span<const SweepRow> rows);

}  // namespace countchain
