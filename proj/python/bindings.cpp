#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "countchain/analysis.hpp"
#include "countchain/hash.hpp"
#include "countchain/sim.hpp"

namespace py = pybind11;
using namespace countchain;
namespace an = countchain::analysis;

namespace {

// Durations cross the boundary as float seconds.
template <typename Class, typename Owner>
void seconds_property(Class& cls, const char* name, SimDuration Owner::*field) {
    cls.def_property(
        name, [field](const Owner& o) { return to_seconds(o.*field); },
        [field](Owner& o, double s) { o.*field = seconds_to_duration(s); });
}

std::string csv_text(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    write_csv(os, rows);
    return os.str();
}

}  // namespace

PYBIND11_MODULE(_countchain, m) {
    m.doc() = "Decentralized event-counting protocol: host, ledger, simulation and closed-form analysis";

    m.def(
        "hash_input_id", [](py::bytes data) { return to_hex(hash_input_id(std::string(data))); }, py::arg("input_id"),
        "SHA-256 of the raw input ID, as 64 lowercase hex characters.");
    m.def(
        "hash_input_id", [](const std::string& data) { return to_hex(hash_input_id(data)); }, py::arg("input_id"));

    m.attr("BAN_DISABLED") = kBanDisabled;

    py::enum_<DishonestAction>(m, "DishonestAction")
        .value("VOTE_FALSE", DishonestAction::VoteFalse)
        .value("ABSTAIN", DishonestAction::Abstain);

    py::class_<SystemConfig> sys(m, "SystemConfig");
    sys.def(py::init<>())
        .def_readwrite("num_verifiers", &SystemConfig::num_verifiers)
        .def_readwrite("proposition_price", &SystemConfig::proposition_price)
        .def_readwrite("ban_threshold", &SystemConfig::ban_threshold)
        .def_readwrite("initial_prize_fund", &SystemConfig::initial_prize_fund)
        .def_readwrite("total_nodes", &SystemConfig::total_nodes)
        .def_readwrite("rng_seed", &SystemConfig::rng_seed);
    seconds_property(sys, "proposition_deadline", &SystemConfig::proposition_deadline);
    seconds_property(sys, "window_half_width", &SystemConfig::window_half_width);

    py::class_<ScenarioSpec>(m, "ScenarioSpec")
        .def(py::init<>())
        .def_readwrite("system", &ScenarioSpec::system)
        .def_readwrite("honesty_rate", &ScenarioSpec::honesty_rate)
        .def_readwrite("corrupted_fraction", &ScenarioSpec::corrupted_fraction)
        .def_readwrite("num_events", &ScenarioSpec::num_events)
        .def_readwrite("event_rate", &ScenarioSpec::event_rate)
        .def_readwrite("seed", &ScenarioSpec::seed)
        .def_readwrite("dishonest_action", &ScenarioSpec::dishonest_action)
        .def_readwrite("packet_loss", &ScenarioSpec::packet_loss)
        .def_readwrite("initial_stake", &ScenarioSpec::initial_stake)
        .def_readwrite("distribute_every", &ScenarioSpec::distribute_every)
        .def_readwrite("record_wall_time", &ScenarioSpec::record_wall_time);

    py::class_<ScenarioMetrics>(m, "ScenarioMetrics")
        .def_readonly("propositions_raised", &ScenarioMetrics::propositions_raised)
        .def_readonly("decided_true", &ScenarioMetrics::decided_true)
        .def_readonly("decided_false", &ScenarioMetrics::decided_false)
        .def_readonly("events_unraised", &ScenarioMetrics::events_unraised)
        .def_readonly("counter", &ScenarioMetrics::counter)
        .def_readonly("corrupted_nodes", &ScenarioMetrics::corrupted_nodes)
        .def_readonly("tie_breaks", &ScenarioMetrics::tie_breaks)
        .def_readonly("mean_hash_evals_per_verifier", &ScenarioMetrics::mean_hash_evals_per_verifier)
        .def_readonly("wall_time_ms", &ScenarioMetrics::wall_time_ms)
        .def_property_readonly("full_success", &ScenarioMetrics::full_success)
        .def_property_readonly("partial_success", &ScenarioMetrics::partial_success)
        .def("__repr__", [](const ScenarioMetrics& x) {
            return "ScenarioMetrics(raised=" + std::to_string(x.propositions_raised) +
                   ", decided_true=" + std::to_string(x.decided_true) + ")";
        });

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("spec", &SweepRow::spec)
        .def_readonly("metrics", &SweepRow::metrics);

    m.def(
        "run_scenario",
        [](const ScenarioSpec& spec) {
            py::gil_scoped_release release;
            return run_scenario(spec);
        },
        py::arg("spec"));
    m.def(
        "run_sweep",
        [](std::vector<double> honesty, std::vector<int> verifiers, std::vector<int> nodes, const ScenarioSpec& base,
           int jobs) {
            if (honesty.empty() || verifiers.empty() || nodes.empty()) throw CountChainError("empty grid");
            py::gil_scoped_release release;
            return run_sweep({std::move(honesty), std::move(verifiers), std::move(nodes)}, base, jobs);
        },
        py::arg("honesty"), py::arg("verifiers"), py::arg("nodes"), py::arg("base"), py::arg("jobs") = 1);
    m.def(
        "run_sybil_experiment",
        [](const ScenarioSpec& base, const std::vector<double>& fractions, const std::vector<double>& unhr, int jobs) {
            py::gil_scoped_release release;
            return run_sybil_experiment(base, fractions, unhr, jobs);
        },
        py::arg("base"), py::arg("corrupted_fractions"), py::arg("uncorrupted_honesty"), py::arg("jobs") = 1);
    m.def("to_csv", &csv_text, py::arg("rows"), "Rows in the fixed 15-column CSV layout.");

    m.def(
        "expected_utilities",
        [](double p, double c) {
            const auto u = an::expected_utilities(p, c);
            return py::make_tuple(u.no_search, u.search_false, u.search_true);
        },
        py::arg("p_true"), py::arg("cost"), "(u_no_search, u_search_false, u_search_true)");
    m.def("mixed_strategy_utility", &an::mixed_strategy_utility, py::arg("mixing"), py::arg("p_true"),
          py::arg("cost"));
    m.def("honest_equilibrium_holds", &an::honest_equilibrium_holds, py::arg("p_true"), py::arg("cost"));
    m.def("decision_threshold", &an::decision_threshold, py::arg("num_verifiers"));
    m.def("decision_probability", &an::decision_probability, py::arg("num_verifiers"), py::arg("honesty"));
    m.def(
        "sybil_majority_probability",
        [](std::int64_t N, std::int64_t D, std::int64_t n, std::optional<std::int64_t> k) {
            auto s = an::SybilSetting::with_default_majority(N, D, n);
            if (k) s.majority = *k;
            return an::sybil_majority_probability(s);
        },
        py::arg("total_nodes"), py::arg("dishonest_nodes"), py::arg("verifiers"), py::arg("majority") = py::none());
    m.def("hypergeometric_pmf", &an::hypergeometric_pmf, py::arg("total_nodes"), py::arg("dishonest_nodes"),
          py::arg("verifiers"));
    m.def(
        "expected_attack_curve",
        [](std::int64_t N, int n, double unhr, const std::vector<double>& fractions) {
            std::vector<std::pair<double, double>> out;
            for (const auto& p : an::expected_attack_curve(N, n, unhr, fractions))
                out.emplace_back(p.corrupted_fraction, p.true_decision_rate);
            return out;
        },
        py::arg("total_nodes"), py::arg("verifiers"), py::arg("unhr"), py::arg("fractions"));
    m.def(
        "binomial_interval",
        [](std::int64_t trials, double p, double conf) {
            const auto iv = an::binomial_interval(trials, p, conf);
            return py::make_tuple(iv.lo, iv.hi);
        },
        py::arg("trials"), py::arg("p"), py::arg("confidence") = 0.99);
    m.def(
        "clopper_pearson",
        [](std::int64_t k, std::int64_t n, double conf) {
            const auto iv = an::clopper_pearson(k, n, conf);
            return py::make_tuple(iv.lo, iv.hi);
        },
        py::arg("successes"), py::arg("trials"), py::arg("confidence") = 0.99);
}
