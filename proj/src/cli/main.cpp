// Experiment harness: evaluate mechanisms, run solvers and GAs, check
// incentive properties, and reproduce the result tables as CSV.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "mech/costshare.hpp"
#include "mech/delay.hpp"
#include "mech/dp.hpp"
#include "mech/evolve.hpp"
#include "mech/market.hpp"
#include "mech/redist.hpp"
#include "mech/tables.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitViolation = 2;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key = value config file; '#' starts a comment. Section headers
// "[name]" prefix subsequent keys with "name.".
class Config {
public:
    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError(path + ": cannot open config file");
        Config cfg;
        std::string line, section;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto strip = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                if (b == std::string::npos) return std::string();
                return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
            };
            line = strip(line);
            if (line.empty()) continue;
            if (line.front() == '[' && line.back() == ']') {
                section = strip(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
            const std::string key = strip(line.substr(0, eq));
            if (key.empty())
                throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
            cfg.values_[section.empty() ? key : section + "." + key] =
                strip(line.substr(eq + 1));
        }
        return cfg;
    }

    std::string get(const std::string& key, const std::string& fallback = "") const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing required config key: " + key);
        return it->second;
    }

    double number(const std::string& key, std::optional<double> fallback = {}) const {
        const auto it = values_.find(key);
        if (it == values_.end()) {
            if (fallback) return *fallback;
            throw ConfigError("missing required config key: " + key);
        }
        try {
            size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": not a number: " + it->second);
        }
    }

private:
    std::map<std::string, std::string> values_;
};

struct GlobalFlags {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::string out_dir = ".";
    int threads = 1;
};

void write_output(const GlobalFlags& flags, const std::string& filename,
                  const std::string& text) {
    std::filesystem::create_directories(flags.out_dir);
    const auto path = std::filesystem::path(flags.out_dir) / filename;
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    std::cout << "wrote " << path.string() << "\n";
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::string csv_header(const std::string& config_text, uint64_t seed) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "# config=%016llx,seed=%llu\n",
                  static_cast<unsigned long long>(fnv1a(config_text)),
                  static_cast<unsigned long long>(seed));
    return buf;
}

mech::Objective parse_objective(const std::string& text) {
    if (text == "consumers") return mech::Objective::consumers;
    if (text == "welfare") return mech::Objective::welfare;
    throw ConfigError("objective must be 'consumers' or 'welfare', got: " + text);
}

mech::BinaryMechanism binary_mechanism(const std::string& name, size_t n) {
    if (name == "cec") return mech::conservative_equal_cost;
    if (name == "scs") return mech::serial_cost_sharing;
    if (name == "largest-unanimous") {
        const mech::CostShareSpec spec = mech::CostShareSpec::equal_shares(n);
        return [spec](const mech::TypeProfile& p) { return mech::largest_unanimous(p, spec); };
    }
    throw ConfigError("unknown mechanism: " + name +
                      " (expected cec, scs, or largest-unanimous)");
}

// evaluate: Monte Carlo objective of a cost-share or delay mechanism.
int run_evaluate(const GlobalFlags& flags) {
    if (flags.config_path.empty()) throw ConfigError("evaluate requires --config");
    const Config cfg = Config::load(flags.config_path);
    const mech::Prior prior = mech::parse_prior(cfg.require("prior"));
    const size_t n = static_cast<size_t>(cfg.number("n"));
    const size_t samples = static_cast<size_t>(cfg.number("samples"));
    if (n < 1 || n > 64) throw ConfigError("n out of range [1, 64]");
    if (samples < 1) throw ConfigError("samples must be >= 1");
    const uint64_t seed = flags.seed.value_or(static_cast<uint64_t>(cfg.number("seed", 42.0)));
    const std::string mechanism = cfg.require("mechanism");

    std::ostringstream out;
    out << csv_header(mechanism + "|" + prior.describe() + "|" + std::to_string(n), seed);
    if (mechanism == "single-deadline" || mechanism == "scs-delay") {
        const double d = mechanism == "scs-delay" ? 1.0 : cfg.number("deadline");
        if (d < 0.0 || d > 1.0) throw ConfigError("deadline out of [0, 1]");
        const auto obj = mech::expected_delay(
            [d](const mech::TypeProfile& p) { return mech::single_deadline(p, d); }, prior, n,
            samples, seed, flags.threads);
        out << "metric,value\nsum_delay," << obj.sum_delay << "\nmax_delay," << obj.max_delay
            << "\n";
    } else {
        const mech::BinaryMechanism mech_fn = binary_mechanism(mechanism, n);
        mech::Rng rng(seed);
        double sums[2] = {0.0, 0.0}, sumsqs[2] = {0.0, 0.0};
        for (size_t s = 0; s < samples; ++s) {
            const mech::TypeProfile profile(prior.sample(rng, n));
            const mech::BinaryOutcome o = mech_fn(profile);
            double consumers = 0.0, welfare = 0.0;
            for (size_t i = 0; i < n; ++i) {
                if (!o.consumes(i)) continue;
                consumers += 1.0;
                welfare += profile[i] - o.payments[i];
            }
            sums[0] += consumers;
            sums[1] += welfare;
            sumsqs[0] += consumers * consumers;
            sumsqs[1] += welfare * welfare;
        }
        out << "objective,mean,stderr\n";
        const char* tags[2] = {"consumers", "welfare"};
        for (int k = 0; k < 2; ++k) {
            const double mean = sums[k] / static_cast<double>(samples);
            const double var = std::max(0.0, sumsqs[k] / samples - mean * mean);
            out << tags[k] << "," << mean << "," << std::sqrt(var / samples) << "\n";
        }
    }
    write_output(flags, "evaluate.csv", out.str());
    return kExitOk;
}

int run_solve_dp(const GlobalFlags& flags) {
    if (flags.config_path.empty()) throw ConfigError("solve-dp requires --config");
    const Config cfg = Config::load(flags.config_path);
    const mech::Prior prior = mech::parse_prior(cfg.require("prior"));
    const int n = static_cast<int>(cfg.number("n"));
    if (n < 1 || n > 64) throw ConfigError("n out of range [1, 64]");
    const std::string solver = cfg.get("solver", "unanimous");
    mech::Discretization disc;
    disc.H = static_cast<int>(cfg.number("H", 200.0));
    if (disc.H < 2) throw ConfigError("H must be >= 2");
    disc.objective = parse_objective(cfg.get("objective", "welfare"));
    disc.threads = flags.threads;
    const uint64_t seed = flags.seed.value_or(42);

    std::ostringstream out;
    out << csv_header(solver + "|" + prior.describe() + "|" + std::to_string(n) + "|" +
                          std::to_string(disc.H),
                      seed);
    out << "solver,n,H,value\n";
    double value = 0.0;
    if (solver == "unanimous")
        value = mech::optimal_unanimous(prior, n, disc).value;
    else if (solver == "upper-bound")
        value = mech::excludable_upper_bound(prior, n, disc);
    else if (solver == "one-directional")
        value = mech::one_directional_offers(prior, n, disc.H, disc.objective).value;
    else
        throw ConfigError("unknown solver: " + solver +
                          " (expected unanimous, upper-bound, or one-directional)");
    out << solver << "," << n << "," << disc.H << "," << value << "\n";
    write_output(flags, "solve-dp.csv", out.str());
    return kExitOk;
}

mech::GAConfig ga_from_config(const Config& cfg, const GlobalFlags& flags) {
    mech::GAConfig ga;
    ga.population = static_cast<int>(cfg.number("ga.population", ga.population));
    ga.elite = static_cast<int>(cfg.number("ga.elite", ga.elite));
    ga.rounds = static_cast<int>(cfg.number("ga.rounds", ga.rounds));
    ga.fitness_profiles = static_cast<int>(cfg.number("ga.fitness_profiles", ga.fitness_profiles));
    ga.mutation_prob = cfg.number("ga.mutation_prob", ga.mutation_prob);
    ga.mutation_delta = cfg.number("ga.mutation_delta", ga.mutation_delta);
    ga.heldout = static_cast<int>(cfg.number("ga.heldout", ga.heldout));
    ga.threads = flags.threads;
    ga.seed = flags.seed.value_or(static_cast<uint64_t>(cfg.number("ga.seed", 42.0)));
    if (ga.population < 1 || ga.elite < 1 || ga.elite > ga.population || ga.rounds < 0)
        throw ConfigError("invalid GA sizes (need population >= elite >= 1, rounds >= 0)");
    return ga;
}

int run_evolve(const GlobalFlags& flags) {
    if (flags.config_path.empty()) throw ConfigError("evolve requires --config");
    const Config cfg = Config::load(flags.config_path);
    const std::string target = cfg.require("target");
    const mech::GAConfig ga = ga_from_config(cfg, flags);
    std::ostringstream out;
    if (target == "sequences") {
        const mech::Prior prior = mech::parse_prior(cfg.require("prior"));
        const size_t n = static_cast<size_t>(cfg.number("n"));
        const bool strict = cfg.get("filter", "strict") == "strict";
        const auto result = mech::evolve_sequences(prior, n, ga, strict);
        out << csv_header("sequences|" + prior.describe() + "|" + std::to_string(n), ga.seed);
        out << "# held-out sum_delay," << result.sum_delay << ",strict,"
            << (result.strict ? 1 : 0) << "\n";
        out << result.best.to_csv();
    } else if (target == "curve") {
        const std::string kind = cfg.get("curve", "fourier");
        mech::Curve::Kind k = mech::Curve::Kind::Fourier;
        size_t coefs = static_cast<size_t>(cfg.number("coefficients", 61.0));
        if (kind == "piecewise") k = mech::Curve::Kind::PiecewiseLinear;
        else if (kind == "polynomial") k = mech::Curve::Kind::Polynomial;
        else if (kind != "fourier") throw ConfigError("unknown curve kind: " + kind);
        const auto result = mech::evolve_market_curve(k, coefs, ga);
        out << csv_header("curve|" + kind, ga.seed);
        out << "# held-out revenue," << result.revenue << "\n";
        out << "coefficient\n";
        for (const double c : result.best.coef) out << c << "\n";
    } else if (target == "h") {
        const mech::Prior prior = mech::parse_prior(cfg.require("prior"));
        const size_t n = static_cast<size_t>(cfg.number("n"));
        const std::string obj = cfg.get("objective", "expectation");
        const auto objective = obj == "worst-case" ? mech::RedistObjective::worst_case
                                                   : mech::RedistObjective::expectation;
        const auto h = mech::optimize_h(objective, prior, n, ga);
        const auto ratio = mech::expected_ratio_terms(h, prior, 100000, ga.seed + 1);
        out << csv_header("h|" + prior.describe() + "|" + std::to_string(n), ga.seed);
        out << "# expected ratio," << ratio.mean << "," << ratio.stderror << "\n";
        out << h.to_csv();
    } else {
        throw ConfigError("unknown evolve target: " + target +
                          " (expected sequences, curve, or h)");
    }
    write_output(flags, "evolve.csv", out.str());
    return kExitOk;
}

int run_check(const GlobalFlags& flags, const std::string& suite, size_t n, size_t trials) {
    if (n < 2 || n > 12) throw ConfigError("--n out of range [2, 12]");
    if (trials < 1) throw ConfigError("--trials must be >= 1");
    const mech::Prior prior = mech::Prior::uniform(0, 1);
    const uint64_t seed = flags.seed.value_or(42);
    const double tol = suite == "ama" ? 1e-6 : 1e-9;

    std::vector<std::pair<std::string, mech::PropertyReport>> reports;
    if (suite == "scs" || suite == "cec" || suite == "largest-unanimous") {
        const mech::BinaryMechanism mech_fn = binary_mechanism(suite, n);
        const mech::UtilityFn utility = mech::binary_utility(mech_fn);
        reports.emplace_back("sp", mech::check_sp(utility, prior, n, trials, tol, seed));
        reports.emplace_back("ir", mech::check_ir(utility, prior, n, trials, tol, seed + 1));
        reports.emplace_back("budget", mech::check_budget(mech_fn, prior, n, trials, seed + 2));
    } else if (suite == "single-deadline") {
        const auto mech_fn = [](const mech::TypeProfile& p) {
            return mech::single_deadline(p, 0.7);
        };
        const mech::UtilityFn utility = mech::delay_utility(mech_fn);
        reports.emplace_back("sp", mech::check_sp(utility, prior, n, trials, tol, seed));
        reports.emplace_back("ir", mech::check_ir(utility, prior, n, trials, tol, seed + 1));
    } else if (suite == "ama") {
        mech::AMASpec spec;
        spec.a.kind = mech::Curve::Kind::Polynomial;
        spec.a.coef = {3.0, -10.0};
        spec.k = 500;
        // Types live on [0,400]x[0,15]; reuse the SP checker on rescaled
        // uniform reports (agent 0 = offender, agent 1 = defender).
        const mech::UtilityFn utility = [&spec](const mech::TypeProfile& reported, size_t agent,
                                                double true_value) {
            const mech::MarketTypes types{reported[0] * 400.0, reported[1] * 15.0};
            const auto out = mech::ama_outcome(types, spec);
            if (agent == 0)
                return mech::offender_value(true_value * 400.0, out.t_end) - out.p_offender;
            return mech::defender_value(true_value * 15.0, out.t_end) - out.p_defender;
        };
        reports.emplace_back("sp", mech::check_sp(utility, prior, 2, trials, tol, seed));
        reports.emplace_back("ir", mech::check_ir(utility, prior, 2, trials, tol, seed + 1));
    } else {
        throw ConfigError("unknown check suite: " + suite);
    }

    std::ostringstream out;
    out << csv_header("check|" + suite + "|" + std::to_string(n), seed);
    out << "property,trials,violations,max_gain\n";
    size_t total = 0;
    for (const auto& [tag, report] : reports) {
        out << tag << "," << report.trials << "," << report.violations.size() << ","
            << report.max_gain << "\n";
        total += report.violations.size();
    }
    write_output(flags, "check-" + suite + ".csv", out.str());
    if (total > 0) {
        std::cerr << suite << ": " << total << " property violations\n";
        return kExitViolation;
    }
    std::cout << suite << ": all properties hold (" << trials << " trials)\n";
    return kExitOk;
}

int run_table(const GlobalFlags& flags, const std::string& preset, double scale) {
    mech::tables::PresetOptions opt;
    opt.seed = flags.seed.value_or(42);
    opt.threads = flags.threads;
    opt.scale = scale;
    if (scale <= 0.0) throw ConfigError("--scale must be positive");
    const std::string csv = mech::tables::run_preset(preset, opt);
    write_output(flags, preset + ".csv", csv);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"strategy-proof public project mechanisms: solvers, GAs and property checks"};
    app.require_subcommand(1);

    GlobalFlags flags;
    uint64_t seed_flag = 0;
    app.add_option("--config", flags.config_path, "config file (key = value lines)");
    auto* seed_opt = app.add_option("--seed", seed_flag, "master RNG seed");
    app.add_option("--out", flags.out_dir, "output directory")->capture_default_str();
    app.add_option("--threads", flags.threads, "worker threads")->capture_default_str();

    auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo objective of a mechanism");
    auto* solve_dp = app.add_subcommand("solve-dp", "dynamic-programming solvers");
    auto* evolve = app.add_subcommand("evolve", "genetic search (sequences, curve, h)");

    auto* check = app.add_subcommand("check", "property suites (exit 2 on any violation)");
    std::string suite;
    size_t check_n = 3, check_trials = 10000;
    check->add_option("suite", suite,
                      "one of: scs, cec, largest-unanimous, single-deadline, ama")
        ->required();
    check->add_option("--n", check_n, "number of agents")->capture_default_str();
    check->add_option("--trials", check_trials, "sampled profiles")->capture_default_str();

    auto* table = app.add_subcommand("table", "reproduction presets");
    std::string preset;
    double scale = 1.0;
    std::string names;
    for (const auto& p : mech::tables::preset_names()) names += (names.empty() ? "" : ", ") + p;
    table->add_option("preset", preset, "one of: " + names)->required();
    table->add_option("--scale", scale, "shrink sample counts / rounds for quick runs")
        ->capture_default_str();

    // Let global flags (--seed, --out, ...) appear after the subcommand name.
    for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }
    if (seed_opt->count() > 0) flags.seed = seed_flag;
    if (flags.threads < 1) {
        std::cerr << "--threads must be >= 1\n";
        return kExitConfigError;
    }

    try {
        if (evaluate->parsed()) return run_evaluate(flags);
        if (solve_dp->parsed()) return run_solve_dp(flags);
        if (evolve->parsed()) return run_evolve(flags);
        if (check->parsed()) return run_check(flags, suite, check_n, check_trials);
        if (table->parsed()) return run_table(flags, preset, scale);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitOk;
}
