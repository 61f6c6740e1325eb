#include "countchain/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "countchain/analysis.hpp"

namespace countchain {
namespace {

enum Stream : std::uint64_t { kNodeStream = 1, kCorruptionStream = 2, kEventIdStream = 3 };

std::string make_input_id(std::uint64_t index, std::uint32_t salt) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "e%06" PRIx64 "%08" PRIx32, index, salt);
    return buf;
}

std::vector<bool> choose_corrupted(int total, std::int64_t count, std::uint64_t seed) {
    std::vector<int> order(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(derive_seed(seed, kCorruptionStream));
    std::vector<bool> corrupted(static_cast<std::size_t>(total), false);
    for (std::int64_t i = 0; i < count; ++i) {
        const auto j = static_cast<std::size_t>(i) + rng.uniform_index(order.size() - static_cast<std::size_t>(i));
        std::swap(order[static_cast<std::size_t>(i)], order[j]);
        corrupted[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
    }
    return corrupted;
}

class Scenario {
public:
    Scenario(const ScenarioSpec& spec, const ResolutionObserver& observer)
        : spec_(spec), observer_(observer), host_(spec.system), rng_(derive_seed(spec.seed, kNodeStream)),
          id_rng_(derive_seed(spec.seed, kEventIdStream)) {
        const int total = spec.system.total_nodes;
        metrics_.corrupted_nodes = analysis::corrupted_count(spec.corrupted_fraction, total);
        const auto corrupted = choose_corrupted(total, metrics_.corrupted_nodes, spec.seed);
        nodes_.reserve(static_cast<std::size_t>(total));
        for (int i = 0; i < total; ++i) {
            const PlayerId id{static_cast<std::uint32_t>(i)};
            nodes_.push_back(make_node(id, spec.honesty_rate, corrupted[static_cast<std::size_t>(i)],
                                       spec.dishonest_action));
            host_.register_player(id, spec.initial_stake);
        }
    }

    ScenarioMetrics run() {
        const auto started = std::chrono::steady_clock::now();
        const SimDuration interval = seconds_to_duration(1.0 / spec_.event_rate);
        const SimDuration retention = 2 * spec_.system.window_half_width + interval;

        for (int i = 0; i < spec_.num_events; ++i) {
            const SimTime now = SimTime{} + interval * (i + 1);
            resolve_through(now);
            broadcast_and_raise(static_cast<std::uint64_t>(i), now);
            if (i % 64 == 63)
                for (auto& n : nodes_) n.local_store.evict_before(now - retention);
        }
        resolve_through(SimTime::max());
        if (spec_.distribute_every == 0 || since_payout_ > 0) host_.distribute_prizes();

        metrics_.events_unraised = spec_.num_events - metrics_.propositions_raised;
        metrics_.counter = static_cast<std::int64_t>(host_.counter());
        std::uint64_t evals = 0;
        for (const auto& n : nodes_) evals += n.hash_evaluations;
        const auto assignments = metrics_.propositions_raised * spec_.system.num_verifiers;
        metrics_.mean_hash_evals_per_verifier =
            assignments > 0 ? static_cast<double>(evals) / static_cast<double>(assignments) : 0.0;
        if (spec_.record_wall_time)
            metrics_.wall_time_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        return metrics_;
    }

private:
    void broadcast_and_raise(std::uint64_t index, SimTime now) {
        const EventRecord event{make_input_id(index, static_cast<std::uint32_t>(id_rng_.next())), now};

        // Step 1: every active node receives (and keeps) the event.
        attempts_.clear();
        for (auto& node : nodes_) {
            if (!host_.is_active(node.player_id)) continue;
            if (spec_.packet_loss > 0.0 && rng_.bernoulli(spec_.packet_loss)) continue;
            ingest_event(node, event);
            // Step 2: each receiver may race to submit a request.
            if (auto req = maybe_submit(node, event, rng_)) attempts_.push_back(std::move(*req));
        }
        // Arrival order at the host is a uniform permutation of the racers.
        for (std::size_t k = attempts_.size(); k > 1; --k)
            std::swap(attempts_[k - 1], attempts_[rng_.uniform_index(k)]);

        std::optional<PropId> raised;
        for (const auto& req : attempts_) {
            const auto res = host_.submit_request(req, now);
            if (res.accepted()) raised = res.prop_id;
        }
        if (!raised) return;
        ++metrics_.propositions_raised;

        // Step 4: assigned verifiers search their stores and vote.
        const Proposition& prop = host_.proposition(*raised);
        for (PlayerId v : prop.verifier_ids) {
            auto vote = produce_vote(nodes_[v.value], prop, now, rng_);
            if (vote) host_.cast_vote(prop.id, *vote, now);
        }
    }

    // One resolution at a time so the observer and periodic payouts see the
    // state right after each outcome.
    void resolve_through(SimTime now) {
        while (const auto out = host_.resolve_next(now)) {
            if (out->decided)
                ++metrics_.decided_true;
            else
                ++metrics_.decided_false;
            if (out->tie_broken_by_submitter) ++metrics_.tie_breaks;
            if (observer_) observer_(host_, *out);
            if (spec_.distribute_every > 0 && ++since_payout_ >= spec_.distribute_every) {
                host_.distribute_prizes();
                since_payout_ = 0;
            }
        }
    }

    const ScenarioSpec& spec_;
    const ResolutionObserver& observer_;
    Host host_;
    Rng rng_;
    Rng id_rng_;
    std::vector<NodeBehavior> nodes_;
    std::vector<PropositionRequest> attempts_;
    ScenarioMetrics metrics_;
    int since_payout_ = 0;
};

void print_fixed(std::ostream& os, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    os << buf;
}

}  // namespace

void validate(const ScenarioSpec& spec) {
    validate(spec.system);
    if (!(spec.honesty_rate >= 0.0 && spec.honesty_rate <= 1.0)) throw CountChainError("honesty must be in [0, 1]");
    if (!(spec.corrupted_fraction >= 0.0 && spec.corrupted_fraction <= 1.0))
        throw CountChainError("corrupted fraction must be in [0, 1]");
    if (!(spec.packet_loss >= 0.0 && spec.packet_loss <= 1.0)) throw CountChainError("packet loss must be in [0, 1]");
    if (spec.num_events < 1) throw CountChainError("events must be positive");
    if (!(spec.event_rate > 0.0) || !std::isfinite(spec.event_rate)) throw CountChainError("rate must be positive");
    if (seconds_to_duration(1.0 / spec.event_rate) <= SimDuration::zero())
        throw CountChainError("rate exceeds the simulated clock resolution");
    if (spec.initial_stake < 0) throw CountChainError("initial stake must be non-negative");
    if (spec.distribute_every < 0) throw CountChainError("distribute_every must be non-negative");
}

ScenarioMetrics run_scenario(const ScenarioSpec& spec, const ResolutionObserver& observer) {
    validate(spec);
    ScenarioSpec local = spec;
    local.system.rng_seed = spec.seed;
    Scenario scenario(local, observer);
    return scenario.run();
}

std::vector<SweepRow> run_specs(std::vector<ScenarioSpec> specs, int jobs) {
    for (const auto& s : specs) validate(s);
    std::vector<SweepRow> rows(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) rows[i].spec = std::move(specs[i]);

    const auto workers = static_cast<std::size_t>(std::clamp<std::size_t>(
        static_cast<std::size_t>(std::max(jobs, 1)), 1, std::max<std::size_t>(rows.size(), 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto work = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            try {
                rows[i].metrics = run_scenario(rows[i].spec);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return rows;
}

std::vector<SweepRow> run_sweep(const SweepGrid& grid, const ScenarioSpec& base, int jobs) {
    if (grid.size() == 0) throw CountChainError("sweep grid is empty");
    std::vector<ScenarioSpec> specs;
    specs.reserve(grid.size());
    std::uint64_t index = 0;
    for (double h : grid.honesty)
        for (int n : grid.verifiers)
            for (int nodes : grid.nodes) {
                ScenarioSpec s = base;
                s.honesty_rate = h;
                s.system.num_verifiers = n;
                s.system.total_nodes = nodes;
                s.seed = base.seed ^ index++;
                specs.push_back(s);
            }
    return run_specs(std::move(specs), jobs);
}

std::vector<SweepRow> run_sybil_experiment(const ScenarioSpec& base, std::span<const double> corrupted_fractions,
                                           std::span<const double> uncorrupted_honesty, int jobs) {
    if (corrupted_fractions.empty() || uncorrupted_honesty.empty())
        throw CountChainError("sybil grid is empty");
    std::vector<ScenarioSpec> specs;
    std::uint64_t index = 0;
    for (double unhr : uncorrupted_honesty)
        for (double f : corrupted_fractions) {
            if (!(f >= 0.0 && f <= 1.0)) throw CountChainError("corrupted fraction must be in [0, 1]");
            ScenarioSpec s = base;
            s.honesty_rate = unhr;
            s.corrupted_fraction = f;
            s.seed = base.seed ^ index++;
            specs.push_back(s);
        }
    return run_specs(std::move(specs), jobs);
}

void write_csv_header(std::ostream& os) {
    os << "seed,total_nodes,num_verifiers,honesty_rate,corrupted_fraction,num_events,raised,decided_true,"
          "decided_false,unraised,counter,full_success,partial_success,mean_hash_evals,wall_time_ms\n";
}

void write_csv_row(std::ostream& os, const SweepRow& row) {
    const auto& s = row.spec;
    const auto& m = row.metrics;
    os << s.seed << ',' << s.system.total_nodes << ',' << s.system.num_verifiers << ',';
    print_fixed(os, s.honesty_rate);
    os << ',';
    print_fixed(os, s.corrupted_fraction);
    os << ',' << s.num_events << ',' << m.propositions_raised << ',' << m.decided_true << ',' << m.decided_false
       << ',' << m.events_unraised << ',' << m.counter << ',' << (m.full_success() ? 1 : 0) << ','
       << (m.partial_success() ? 1 : 0) << ',';
    print_fixed(os, m.mean_hash_evals_per_verifier);
    os << ',';
    print_fixed(os, m.wall_time_ms);
    os << '\n';
}

void write_csv(std::ostream& os, std::span<const SweepRow> rows) {
    write_csv_header(os);
    for (const auto& r : rows) write_csv_row(os, r);
}

}  // namespace countchain
