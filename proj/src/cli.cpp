#include "countchain/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include "countchain/analysis.hpp"
#include "countchain/chart.hpp"
#include "countchain/sim.hpp"

namespace countchain::cli {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

double parse_number(std::string_view text) {
    const std::string s = trim(text);
    if (s.empty()) throw UsageError("empty grid value");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) throw UsageError("not a number: '" + s + "'");
    return v;
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string seconds_text(SimDuration d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", to_seconds(d));
    return buf;
}

// Scenario flags shared by simulate, sweep and sybil.
struct ScenarioFlags {
    std::uint64_t seed = 0;
    int nodes = 100;
    int verifiers = 14;
    double honesty = 0.85;
    double corrupted = 0.0;
    int events = 1000;
    double rate = 10.0;
    StakeUnits price = 1;
    double deadline = 2.0;
    double delay = 1.0;
    std::string threshold = "-5";
    std::string dishonest = "vote_false";
    double packet_loss = 0.0;
    StakeUnits initial_stake = 1000;
    StakeUnits prize_fund = 0;
    int distribute_every = 0;
    bool timing = false;
    std::string out;
    std::string config;

    ScenarioSpec to_spec() const {
        ScenarioSpec s;
        s.seed = seed;
        s.system.total_nodes = nodes;
        s.system.num_verifiers = verifiers;
        s.system.proposition_price = price;
        s.system.proposition_deadline = seconds_to_duration(deadline);
        s.system.window_half_width = seconds_to_duration(delay);
        s.system.initial_prize_fund = prize_fund;
        const std::string t = trim(threshold);
        if (t == "none") {
            s.system.ban_threshold = kBanDisabled;
        } else {
            Points v = 0;
            auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec != std::errc{} || p != t.data() + t.size()) throw UsageError("--threshold must be an integer or 'none'");
            s.system.ban_threshold = v;
        }
        s.honesty_rate = honesty;
        s.corrupted_fraction = corrupted;
        s.num_events = events;
        s.event_rate = rate;
        if (dishonest == "vote_false")
            s.dishonest_action = DishonestAction::VoteFalse;
        else if (dishonest == "abstain")
            s.dishonest_action = DishonestAction::Abstain;
        else
            throw UsageError("--dishonest-action must be vote_false or abstain");
        s.packet_loss = packet_loss;
        s.initial_stake = initial_stake;
        s.distribute_every = distribute_every;
        s.record_wall_time = timing;
        return s;
    }
};

void add_scenario_flags(CLI::App* sub, ScenarioFlags& f) {
    sub->add_option("--config", f.config, "key=value config file; command-line flags take precedence");
    sub->add_option("--seed", f.seed, "RNG seed (falls back to COUNTCHAIN_SEED)");
    sub->add_option("--nodes", f.nodes, "total nodes")->capture_default_str();
    sub->add_option("--verifiers", f.verifiers, "verifiers per proposition")->capture_default_str();
    sub->add_option("--honesty", f.honesty, "honesty rate of uncorrupted nodes")->capture_default_str();
    sub->add_option("--corrupted-frac", f.corrupted, "fraction of corrupted nodes")->capture_default_str();
    sub->add_option("--events", f.events, "number of events")->capture_default_str();
    sub->add_option("--rate", f.rate, "events per simulated second")->capture_default_str();
    sub->add_option("--price", f.price, "proposition price (stake units)")->capture_default_str();
    sub->add_option("--deadline", f.deadline, "proposition deadline (seconds)")->capture_default_str();
    sub->add_option("--delay", f.delay, "window half-width (seconds)")->capture_default_str();
    sub->add_option("--threshold", f.threshold, "ban threshold (<= 0) or 'none'")->capture_default_str();
    sub->add_option("--dishonest-action", f.dishonest, "vote_false | abstain")->capture_default_str();
    sub->add_option("--packet-loss", f.packet_loss, "per-node event loss probability")->capture_default_str();
    sub->add_option("--initial-stake", f.initial_stake, "starting stake per node")->capture_default_str();
    sub->add_option("--prize-fund", f.prize_fund, "initial prize pool")->capture_default_str();
    sub->add_option("--distribute-every", f.distribute_every, "resolutions between payouts (0 = end of run)")
        ->capture_default_str();
    sub->add_flag("--timing", f.timing, "record wall_time_ms (breaks byte-identical output)");
    sub->add_option("--out", f.out, "CSV output path (default: stdout)");
}

std::string option_key(const CLI::Option* opt) {
    std::string name = opt->get_single_name();
    while (!name.empty() && name.front() == '-') name.erase(name.begin());
    return name;
}

// Fills options that were not given on the command line from the config
// file, then falls back to COUNTCHAIN_SEED for the seed.
void apply_config(CLI::App* sub, const std::string& config_path) {
    std::map<std::string, std::string> cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path);

    std::set<std::string> known;
    for (const CLI::Option* opt : sub->get_options()) known.insert(option_key(opt));
    for (const auto& [key, value] : cfg)
        if (!known.contains(key)) throw UsageError("unknown config key '" + key + "'");

    for (CLI::Option* opt : sub->get_options()) {
        if (opt->count() > 0) continue;
        const std::string key = option_key(opt);
        if (key == "config" || key == "help") continue;
        auto it = cfg.find(key);
        std::string value;
        if (it != cfg.end()) {
            value = it->second;
        } else if (key == "seed") {
            const char* env = std::getenv("COUNTCHAIN_SEED");
            if (!env || !*env) continue;
            value = env;
        } else {
            continue;
        }
        try {
            opt->add_result(value);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw UsageError("bad value for '" + key + "': " + e.what());
        }
    }
}

std::ostream& open_output(const std::string& path, std::ofstream& file, std::ostream& fallback) {
    if (path.empty()) return fallback;
    file.open(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open " + path + " for writing");
    return file;
}

// Constant parameters of a run, written next to the CSV as a reloadable config.
void write_provenance(const std::string& out_path, const ScenarioFlags& f, const ScenarioSpec& spec,
                      const std::vector<std::pair<std::string, std::string>>& extra) {
    if (out_path.empty()) return;
    std::ofstream os(out_path + ".params", std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + out_path + ".params");
    os << "# parameters for " << out_path << "\n";
    os << "seed=" << spec.seed << "\n";
    os << "nodes=" << spec.system.total_nodes << "\n";
    os << "verifiers=" << spec.system.num_verifiers << "\n";
    os << "honesty=" << fixed6(spec.honesty_rate) << "\n";
    os << "corrupted-frac=" << fixed6(spec.corrupted_fraction) << "\n";
    os << "events=" << spec.num_events << "\n";
    os << "rate=" << fixed6(spec.event_rate) << "\n";
    os << "price=" << spec.system.proposition_price << "\n";
    os << "deadline=" << seconds_text(spec.system.proposition_deadline) << "\n";
    os << "delay=" << seconds_text(spec.system.window_half_width) << "\n";
    os << "threshold=" << trim(f.threshold) << "\n";
    os << "dishonest-action=" << f.dishonest << "\n";
    os << "packet-loss=" << fixed6(spec.packet_loss) << "\n";
    os << "initial-stake=" << spec.initial_stake << "\n";
    os << "prize-fund=" << spec.system.initial_prize_fund << "\n";
    os << "distribute-every=" << spec.distribute_every << "\n";
    for (const auto& [k, v] : extra) os << k << "=" << v << "\n";
}

std::string chart_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void save_chart(const std::string& path, const LineChart& chart) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write chart " + path);
    write_svg(os, chart);
}

void emit_sweep_charts(const std::string& prefix, const SweepGrid& grid, const std::vector<SweepRow>& rows) {
    auto find = [&](double h, int n, int nodes) -> const ScenarioMetrics& {
        for (const auto& r : rows)
            if (r.spec.honesty_rate == h && r.spec.system.num_verifiers == n && r.spec.system.total_nodes == nodes)
                return r.metrics;
        throw std::logic_error("missing sweep row");
    };
    if (grid.honesty.size() > 1) {
        for (int nodes : grid.nodes) {
            LineChart c{"Decided True vs honesty rate (" + std::to_string(nodes) + " nodes)", "honesty rate",
                        "decided True", {}};
            for (int n : grid.verifiers) {
                ChartSeries s{"n=" + std::to_string(n), {}};
                for (double h : grid.honesty)
                    s.points.emplace_back(h, static_cast<double>(find(h, n, nodes).decided_true));
                c.series.push_back(std::move(s));
            }
            save_chart(prefix + "_nodes" + std::to_string(nodes) + ".svg", c);
        }
    } else if (grid.nodes.size() > 1) {
        const double h = grid.honesty.front();
        LineChart c{"Decided True vs node count (honesty " + chart_value(h) + ")", "total nodes", "decided True", {}};
        for (int n : grid.verifiers) {
            ChartSeries s{"n=" + std::to_string(n), {}};
            for (int nodes : grid.nodes)
                s.points.emplace_back(nodes, static_cast<double>(find(h, n, nodes).decided_true));
            c.series.push_back(std::move(s));
        }
        save_chart(prefix + "_h" + chart_value(h) + ".svg", c);
    } else {
        const double h = grid.honesty.front();
        const int nodes = grid.nodes.front();
        LineChart c{"Decided True vs verifier count", "verifiers", "decided True", {}};
        ChartSeries s{"h=" + chart_value(h), {}};
        for (int n : grid.verifiers) s.points.emplace_back(n, static_cast<double>(find(h, n, nodes).decided_true));
        c.series.push_back(std::move(s));
        save_chart(prefix + "_verifiers.svg", c);
    }
}

void emit_sybil_chart(const std::string& prefix, const std::vector<double>& unhr, const std::vector<SweepRow>& rows) {
    LineChart c{"Decided True under Sybil attack", "corrupted fraction", "decided True", {}};
    for (double u : unhr) {
        ChartSeries s{"UNHR=" + chart_value(u), {}};
        for (const auto& r : rows)
            if (r.spec.honesty_rate == u)
                s.points.emplace_back(r.spec.corrupted_fraction, static_cast<double>(r.metrics.decided_true));
        c.series.push_back(std::move(s));
    }
    save_chart(prefix + "_sybil.svg", c);
}

struct AnalyzeFlags {
    double pt = 0, c = 0, x = -1;
    std::int64_t N = 0, D = 0, n = 0, k = -1;
    double h = 0, unhr = 1.0;
    std::string grid = "0:1:0.05";
    bool csv = false;
};

}  // namespace

std::vector<double> parse_grid(std::string_view text) {
    const std::string s = trim(text);
    if (s.empty()) throw UsageError("grid is empty");
    std::vector<double> values;
    if (s.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(s);
        for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
        if (parts.size() != 3) throw UsageError("range grid must be start:stop:step");
        const double start = parse_number(parts[0]);
        const double stop = parse_number(parts[1]);
        const double step = parse_number(parts[2]);
        if (!(step > 0.0)) throw UsageError("grid step must be positive");
        if (stop < start) throw UsageError("grid stop must be >= start");
        const double span = (stop - start) / step;
        const auto count = static_cast<std::int64_t>(std::floor(span + 1e-9)) + 1;
        if (count > 1'000'000) throw UsageError("grid too large");
        for (std::int64_t i = 0; i < count; ++i) {
            // Snap to 12 significant decimals so 0.05 steps print as 0.150000, not 0.15000000000000002.
            const double v = start + static_cast<double>(i) * step;
            values.push_back(std::round(v * 1e12) / 1e12);
        }
    } else {
        std::stringstream ss(s);
        for (std::string part; std::getline(ss, part, ',');) values.push_back(parse_number(part));
        if (!s.empty() && s.back() == ',') throw UsageError("trailing comma in grid");
    }
    if (values.empty()) throw UsageError("grid is empty");
    return values;
}

std::vector<int> parse_int_grid(std::string_view text) {
    std::vector<int> out;
    for (double v : parse_grid(text)) {
        if (v != std::round(v) || std::abs(v) > 1e9) throw UsageError("grid value is not an integer: " + fixed6(v));
        out.push_back(static_cast<int>(v));
    }
    return out;
}

std::map<std::string, std::string> parse_config(std::string_view text) {
    std::map<std::string, std::string> cfg;
    std::stringstream ss{std::string(text)};
    int line_no = 0;
    for (std::string line; std::getline(ss, line);) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        while (!key.empty() && key.front() == '-') key.erase(key.begin());
        if (key.empty()) throw UsageError("config line " + std::to_string(line_no) + ": empty key");
        cfg[key] = trim(t.substr(eq + 1));
    }
    return cfg;
}

std::map<std::string, std::string> load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Counting-oracle protocol simulator and analysis tool", "countchain"};
    app.require_subcommand(1);

    ScenarioFlags sim_flags;
    auto* simulate = app.add_subcommand("simulate", "run one scenario and print its metrics row");
    add_scenario_flags(simulate, sim_flags);

    ScenarioFlags sweep_flags;
    std::string honesty_grid, verifier_grid, node_grid, sweep_chart;
    int sweep_jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "honesty x verifiers x nodes grid");
    add_scenario_flags(sweep, sweep_flags);
    sweep->add_option("--honesty-grid", honesty_grid, "e.g. 0:1:0.05 (default: --honesty)");
    sweep->add_option("--verifier-grid", verifier_grid, "e.g. 1:20:1 (default: --verifiers)");
    sweep->add_option("--node-grid", node_grid, "e.g. 50:1000:50 (default: --nodes)");
    sweep->add_option("--jobs", sweep_jobs, "worker threads")->capture_default_str();
    sweep->add_option("--chart", sweep_chart, "write SVG line charts with this path prefix");

    ScenarioFlags sybil_flags;
    sybil_flags.nodes = 200;
    std::string corrupted_grid = "0:1:0.05", unhr_grid = "1.0,0.85", sybil_chart;
    int sybil_jobs = 1;
    auto* sybil = app.add_subcommand("sybil", "corrupted-fraction x UNHR attack grid");
    add_scenario_flags(sybil, sybil_flags);
    sybil->add_option("--corrupted-grid", corrupted_grid, "corrupted fractions")->capture_default_str();
    sybil->add_option("--unhr", unhr_grid, "honesty of uncorrupted nodes")->capture_default_str();
    sybil->add_option("--jobs", sybil_jobs, "worker threads")->capture_default_str();
    sybil->add_option("--chart", sybil_chart, "write an SVG line chart with this path prefix");

    AnalyzeFlags af;
    auto* analyze = app.add_subcommand("analyze", "closed-form incentive and probability values");
    analyze->require_subcommand(1);
    auto* utilities = analyze->add_subcommand("utilities", "single-verifier expected utilities");
    utilities->add_option("--pt", af.pt, "fraction of True propositions")->required();
    utilities->add_option("--c", af.c, "proof-search cost")->required();
    utilities->add_option("--x", af.x, "also report the mixed-strategy utility at this mix");
    utilities->add_flag("--csv", af.csv);
    auto* sybil_prob = analyze->add_subcommand("sybil-prob", "P(>= k dishonest among n sampled verifiers)");
    sybil_prob->add_option("--N", af.N, "total nodes")->required();
    sybil_prob->add_option("--D", af.D, "dishonest nodes")->required();
    sybil_prob->add_option("--n", af.n, "verifiers")->required();
    sybil_prob->add_option("--k", af.k, "dishonest majority (default: strict majority)");
    sybil_prob->add_flag("--csv", af.csv);
    auto* decision_prob = analyze->add_subcommand("decision-prob", "P(true proposition decided True)");
    decision_prob->set_help_flag("--help", "Print this help message and exit");  // frees --h
    decision_prob->add_option("--n", af.n, "verifiers")->required();
    decision_prob->add_option("--h", af.h, "honesty rate")->required();
    decision_prob->add_flag("--csv", af.csv);
    auto* attack_curve = analyze->add_subcommand("attack-curve", "expected True-decision rate per corrupted fraction");
    attack_curve->add_option("--N", af.N, "total nodes")->required();
    attack_curve->add_option("--n", af.n, "verifiers")->required();
    attack_curve->add_option("--unhr", af.unhr, "honesty of uncorrupted nodes")->capture_default_str();
    attack_curve->add_option("--grid", af.grid, "corrupted fractions")->capture_default_str();
    attack_curve->add_flag("--csv", af.csv);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            apply_config(simulate, sim_flags.config);
            SweepRow row{sim_flags.to_spec(), {}};
            validate(row.spec);
            row.metrics = run_scenario(row.spec);
            std::ofstream file;
            std::ostream& os = open_output(sim_flags.out, file, out);
            write_csv(os, std::span<const SweepRow>(&row, 1));
            write_provenance(sim_flags.out, sim_flags, row.spec, {});
            return kExitOk;
        }
        if (sweep->parsed()) {
            apply_config(sweep, sweep_flags.config);
            const ScenarioSpec base = sweep_flags.to_spec();
            SweepGrid grid;
            grid.honesty = sweep->get_option("--honesty-grid")->count() ? parse_grid(honesty_grid)
                                                                          : std::vector<double>{sweep_flags.honesty};
            grid.verifiers = sweep->get_option("--verifier-grid")->count() ? parse_int_grid(verifier_grid)
                                                                             : std::vector<int>{sweep_flags.verifiers};
            grid.nodes = sweep->get_option("--node-grid")->count() ? parse_int_grid(node_grid)
                                                                     : std::vector<int>{sweep_flags.nodes};
            if (sweep_jobs < 1) throw UsageError("--jobs must be >= 1");
            const auto rows = run_sweep(grid, base, sweep_jobs);
            std::ofstream file;
            std::ostream& os = open_output(sweep_flags.out, file, out);
            write_csv(os, rows);
            write_provenance(sweep_flags.out, sweep_flags, base,
                             {{"honesty-grid", honesty_grid}, {"verifier-grid", verifier_grid}, {"node-grid", node_grid}});
            if (!sweep_chart.empty()) emit_sweep_charts(sweep_chart, grid, rows);
            return kExitOk;
        }
        if (sybil->parsed()) {
            apply_config(sybil, sybil_flags.config);
            const ScenarioSpec base = sybil_flags.to_spec();
            const auto fractions = parse_grid(corrupted_grid);
            const auto unhr = parse_grid(unhr_grid);
            if (sybil_jobs < 1) throw UsageError("--jobs must be >= 1");
            const auto rows = run_sybil_experiment(base, fractions, unhr, sybil_jobs);
            std::ofstream file;
            std::ostream& os = open_output(sybil_flags.out, file, out);
            write_csv(os, rows);
            write_provenance(sybil_flags.out, sybil_flags, base, {{"corrupted-grid", corrupted_grid}, {"unhr", unhr_grid}});
            if (!sybil_chart.empty()) emit_sybil_chart(sybil_chart, unhr, rows);
            return kExitOk;
        }
        if (utilities->parsed()) {
            const auto u = analysis::expected_utilities(af.pt, af.c);
            const bool eq = analysis::honest_equilibrium_holds(af.pt, af.c);
            const bool with_mix = af.x >= 0;
            const double mixed = with_mix ? analysis::mixed_strategy_utility(af.x, af.pt, af.c) : 0.0;
            if (af.csv) {
                out << "p_t,c,u_no_search,u_search_false,u_search_true,honest_equilibrium" << (with_mix ? ",x,u_mixed" : "")
                    << "\n"
                    << fixed6(af.pt) << ',' << fixed6(af.c) << ',' << fixed6(u.no_search) << ','
                    << fixed6(u.search_false) << ',' << fixed6(u.search_true) << ',' << (eq ? "true" : "false");
                if (with_mix) out << ',' << fixed6(af.x) << ',' << fixed6(mixed);
                out << "\n";
            } else {
                out << "u_no_search=" << fixed6(u.no_search) << "\n"
                    << "u_search_false=" << fixed6(u.search_false) << "\n"
                    << "u_search_true=" << fixed6(u.search_true) << "\n"
                    << "honest_equilibrium=" << (eq ? "true" : "false") << "\n";
                if (with_mix) out << "u_mixed=" << fixed6(mixed) << "\n";
            }
            return kExitOk;
        }
        if (sybil_prob->parsed()) {
            auto setting = analysis::SybilSetting::with_default_majority(af.N, af.D, af.n);
            if (af.k >= 0) setting.majority = af.k;
            const double p = analysis::sybil_majority_probability(setting);
            if (af.csv)
                out << "N,D,n,k,probability\n"
                    << af.N << ',' << af.D << ',' << af.n << ',' << setting.majority << ',' << fixed6(p) << "\n";
            else
                out << "probability=" << fixed6(p) << "\n";
            return kExitOk;
        }
        if (decision_prob->parsed()) {
            if (af.n < 1 || af.n > 100000) throw CountChainError("--n must be in [1, 100000]");
            const double p = analysis::decision_probability(static_cast<int>(af.n), af.h);
            if (af.csv)
                out << "n,h,probability\n" << af.n << ',' << fixed6(af.h) << ',' << fixed6(p) << "\n";
            else
                out << "probability=" << fixed6(p) << "\n";
            return kExitOk;
        }
        if (attack_curve->parsed()) {
            if (af.n < 1 || af.n > af.N) throw CountChainError("--n must be in [1, N]");
            const auto fractions = parse_grid(af.grid);
            const auto curve = analysis::expected_attack_curve(af.N, static_cast<int>(af.n), af.unhr, fractions);
            if (af.csv) out << "corrupted_fraction,true_decision_rate\n";
            for (const auto& pt : curve)
                out << fixed6(pt.corrupted_fraction) << (af.csv ? "," : " ") << fixed6(pt.true_decision_rate) << "\n";
            return kExitOk;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CountChainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    err << "error: no command\n";
    return kExitUsage;
}

}  // namespace countchain::cli
