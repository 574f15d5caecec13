// thinwalk-lab: command line front end for walks, quotients, spectra, residuals,
// sieve bounds and decay experiments.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "thinwalk/lab.hpp"

namespace tw = thinwalk;

namespace {

struct Common {
    std::uint64_t seed = 1;
    std::uint64_t trials = 1000;
    std::string grid = "geometric:4:256";
    std::string out;
    std::string format = "csv";
    unsigned threads = 0;
};

/// Writes to --out when given, else stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw tw::ConfigError("cannot open output file " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void add_common(CLI::App* app, Common& c, bool with_grid) {
    app->add_option("--seed", c.seed, "64-bit RNG seed");
    app->add_option("--trials", c.trials, "Monte Carlo trials");
    if (with_grid) app->add_option("--grid", c.grid, "comma list, geometric:start:stop or range:start:stop:step");
    app->add_option("--out", c.out, "output path (default stdout)");
    app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--threads", c.threads, "worker threads (0 = all cores)");
}

tw::Scenario load_scenario(const std::string& name, const std::string& config) {
    if (!config.empty()) {
        std::ifstream in(config);
        if (!in) throw tw::ConfigError("cannot read scenario config " + config);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw tw::ConfigError(std::string("scenario config is not valid JSON: ") + e.what());
        }
        return tw::Scenario::from_json(j);
    }
    if (name.empty()) throw tw::ConfigError("give --scenario or --config");
    return tw::find_scenario(name);
}

tw::GeneratorMultiset<tw::MatrixElement> cli_generators(unsigned dim, const std::string& kind) {
    if (kind == "st") {
        if (dim != 2) throw tw::ConfigError("S,T generators exist only for dimension 2");
        return tw::validate_generators(tw::sl2_st_generators());
    }
    if (kind == "elementary") return tw::validate_generators(tw::elementary_generators(dim));
    throw tw::ConfigError("generators must be st or elementary");
}

std::vector<tw::u64> parse_primes(const std::string& text) {
    std::vector<tw::u64> ps;
    for (auto n : tw::parse_grid(text)) ps.push_back(n);
    return ps;
}

int run(int argc, char** argv) {
    CLI::App app{"Random walks on arithmetic groups, sieve bounds and thin-set experiments"};
    app.require_subcommand(1);
    Common c;

    // walk
    auto* walk = app.add_subcommand("walk", "trajectories of the walk, or the exact law of w_n");
    std::string walk_scenario;
    std::uint64_t walk_n = 10, walk_trial = 0;
    bool walk_exact = false;
    std::size_t walk_budget = tw::kDefaultExactBudget;
    walk->add_option("--scenario", walk_scenario, "scenario supplying the group and generators")->required();
    walk->add_option("--n", walk_n, "walk length");
    walk->add_option("--trial", walk_trial, "first trial index");
    walk->add_flag("--exact", walk_exact, "print the exact distribution of w_n");
    walk->add_option("--budget", walk_budget, "state budget for --exact");
    add_common(walk, c, false);

    // spectrum
    auto* spectrum = app.add_subcommand("spectrum", "second eigenvalue of Cay(SL_n(F_p), A)");
    unsigned spec_dim = 2;
    std::string spec_gens = "st", spec_primes = "3,5,7";
    double spec_eps = -1.0;
    spectrum->add_option("--dim", spec_dim, "matrix dimension");
    spectrum->add_option("--generators", spec_gens, "st or elementary");
    spectrum->add_option("--primes", spec_primes, "primes (grid syntax)");
    spectrum->add_option("--epsilon", spec_eps, "also certify pi_1 <= 1 - epsilon");
    add_common(spectrum, c, false);

    // closure
    auto* closure = app.add_subcommand("closure", "closure of the reduced generators mod p or mod p*q");
    unsigned clo_dim = 2;
    std::string clo_gens = "st", clo_primes = "3,5";
    bool clo_pair = false;
    std::size_t clo_budget = tw::kDefaultEnumerationBudget;
    closure->add_option("--dim", clo_dim, "matrix dimension");
    closure->add_option("--generators", clo_gens, "st or elementary");
    closure->add_option("--primes", clo_primes, "primes (grid syntax)");
    closure->add_flag("--pair", clo_pair, "close in SL_n(F_p) x SL_n(F_q) for the first two primes");
    closure->add_option("--budget", clo_budget, "element budget");
    add_common(closure, c, false);

    // residual
    auto* residual = app.add_subcommand("residual", "residual densities of a scenario's thin set");
    std::string res_scenario, res_config, res_primes = "3,5,7", res_mode = "enumerate";
    std::uint64_t res_samples = 100000;
    residual->add_option("--scenario", res_scenario, "built-in scenario");
    residual->add_option("--config", res_config, "scenario JSON");
    residual->add_option("--primes", res_primes, "primes (grid syntax)");
    residual->add_option("--mode", res_mode, "enumerate or sample")->check(CLI::IsMember({"enumerate", "sample"}));
    residual->add_option("--samples", res_samples, "samples per prime in sample mode");
    add_common(residual, c, false);

    // bound
    auto* bound = app.add_subcommand("bound", "sieve bounds");
    std::string b_kind = "plan", b_c = "1", b_alpha = "1/2", b_beta = "1/2", b_delta = "0", b_density = "1/4";
    unsigned b_a = 5, b_d = 6;
    std::uint64_t b_t = 2;
    std::string b_order = "24";
    double b_pi = -1.0;
    bound->add_option("--kind", b_kind, "chebyshev, threshold, plan or single-prime")
        ->check(CLI::IsMember({"chebyshev", "threshold", "plan", "single-prime"}));
    bound->add_option("--a-size", b_a, "|A|");
    bound->add_option("--C", b_c, "growth constant C (rational)");
    bound->add_option("--D", b_d, "growth exponent D");
    bound->add_option("--alpha", b_alpha, "sieve margin alpha (rational)");
    bound->add_option("--t", b_t, "number of quotients");
    bound->add_option("--beta", b_beta, "chebyshev beta (rational)");
    bound->add_option("--delta", b_delta, "chebyshev delta (rational)");
    bound->add_option("--order", b_order, "quotient order for single-prime");
    bound->add_option("--density", b_density, "residual density for single-prime (rational)");
    bound->add_option("--pi-star", b_pi, "measured pi_* for single-prime");
    add_common(bound, c, true);

    // experiment
    auto* experiment = app.add_subcommand("experiment", "sweep P(w_n in Z) over a grid of n");
    std::string ex_scenario, ex_config;
    bool ex_exact = false, ex_fit = false;
    std::size_t ex_budget = tw::kDefaultExactBudget;
    experiment->add_option("--scenario", ex_scenario, "built-in scenario");
    experiment->add_option("--config", ex_config, "scenario JSON");
    experiment->add_flag("--exact", ex_exact, "exact convolution instead of Monte Carlo");
    experiment->add_option("--budget", ex_budget, "state budget for --exact");
    experiment->add_flag("--fit", ex_fit, "print the decay fit to stderr");
    add_common(experiment, c, true);

    // fit
    auto* fit = app.add_subcommand("fit", "fit decay models to an experiment table");
    std::string fit_in;
    std::uint64_t fit_min_trials = 1;
    fit->add_option("--in", fit_in, "experiment CSV (default stdin)");
    fit->add_option("--min-trials", fit_min_trials, "ignore Monte Carlo rows with fewer trials");
    add_common(fit, c, false);

    // scenarios
    auto* scenarios = app.add_subcommand("scenarios", "list or describe built-in scenarios");
    std::string sc_describe;
    scenarios->add_option("--describe", sc_describe, "scenario to describe");
    add_common(scenarios, c, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    Sink sink(c.out);
    std::ostream& os = sink.stream();
    const bool json = c.format == "json";

    if (*walk) {
        const tw::Scenario s = tw::find_scenario(walk_scenario);
        auto emit = [&](const auto& gens) {
            if (walk_exact) {
                os << tw::exact_distribution(gens, walk_n, walk_budget).to_json().dump(2) << '\n';
                return;
            }
            using E = std::decay_t<decltype(gens.identity())>;
            tw::WalkConfig<E> cfg{gens, walk_n, walk_trial + c.trials, c.seed, walk_budget};
            nlohmann::json all = nlohmann::json::array();
            if (!json) os << "trial,step,element\n";
            for (std::uint64_t i = walk_trial; i < walk_trial + c.trials; ++i) {
                const auto path = tw::run_walk(cfg, i);
                if (json) {
                    nlohmann::json p = nlohmann::json::array();
                    for (const auto& g : path) p.push_back(g.to_json());
                    all.push_back({{"trial", i}, {"path", p}});
                } else {
                    for (std::size_t k = 0; k < path.size(); ++k) os << i << ',' << k << ",\"" << path[k].key() << "\"\n";
                }
            }
            if (json) os << all.dump(2) << '\n';
        };
        if (s.is_matrix()) emit(tw::matrix_generators(s));
        else emit(tw::abelian_generators(s));
        return 0;
    }

    if (*spectrum) {
        const auto gens = cli_generators(spec_dim, spec_gens);
        std::vector<tw::AdjacencySpectrum> rows;
        for (tw::u64 p : parse_primes(spec_primes)) rows.push_back(tw::second_eigenvalue(tw::SlModPrime(spec_dim, p), gens));
        nlohmann::json j = nlohmann::json::array();
        if (!json) os << tw::AdjacencySpectrum::csv_header() << '\n';
        for (const auto& r : rows) {
            if (json) {
                j.push_back({{"modulus", r.modulus}, {"order", r.order}, {"a_size", r.a_size}, {"pi_1", r.pi_1},
                             {"pi_min", r.pi_min}, {"pi_star", r.pi_star}, {"method", r.method}, {"residual", r.residual}});
            } else {
                os << r.csv_row() << '\n';
            }
        }
        if (spec_eps >= 0) {
            const auto rep = tw::expander_certify(rows, spec_eps);
            if (json) {
                j = {{"spectra", j}, {"certified", rep.ok}, {"epsilon", rep.epsilon}, {"violators", rep.violators}};
            } else {
                std::cerr << "expander(" << spec_eps << "): " << (rep.ok ? "certified" : "violated") << '\n';
            }
        }
        if (json) os << j.dump(2) << '\n';
        return 0;
    }

    if (*closure) {
        const auto gens = cli_generators(clo_dim, clo_gens);
        const auto primes = parse_primes(clo_primes);
        std::vector<tw::ClosureResult> rows;
        if (clo_pair) {
            if (primes.size() < 2) throw tw::ConfigError("--pair needs two primes");
            tw::SlModPair g(clo_dim, primes[0], primes[1]);
            rows.push_back(tw::bfs_closure(g, tw::reduce_generators(g, gens).elements, clo_budget));
        } else {
            for (tw::u64 p : primes) {
                tw::SlModPrime g(clo_dim, p);
                rows.push_back(tw::bfs_closure(g, tw::reduce_generators(g, gens).elements, clo_budget));
            }
        }
        nlohmann::json j = nlohmann::json::array();
        if (!json) os << "modulus,order,closure_size,surjective\n";
        for (const auto& r : rows) {
            if (json) j.push_back(r.to_json());
            else os << r.modulus << ',' << r.order << ',' << r.reached << ',' << (r.surjective ? "true" : "false") << '\n';
        }
        if (json) os << j.dump(2) << '\n';
        return 0;
    }

    if (*residual) {
        const tw::Scenario s = load_scenario(res_scenario, res_config);
        const auto mode = res_mode == "enumerate" ? tw::ResidualMode::Enumerate : tw::ResidualMode::Sample;
        const auto primes = parse_primes(res_primes);
        tw::AlphaEstimate a;
        if (s.is_matrix()) {
            const tw::MatrixThinSet oracle(s.oracle, tw::matrix_generators(s));
            a = tw::estimate_alpha(oracle, tw::sl_quotients(s.dimension(), primes), mode, tw::kDefaultEnumerationBudget,
                                   res_samples, c.seed);
        } else {
            const tw::AbelianThinSet oracle(s.oracle);
            std::vector<tw::CyclicProduct> qs;
            for (tw::u64 p : primes) qs.emplace_back(std::vector<tw::u64>(s.dimension(), p));
            a = tw::estimate_alpha(oracle, qs, mode, tw::kDefaultEnumerationBudget, res_samples, c.seed);
        }
        if (json) {
            os << a.to_json().dump(2) << '\n';
        } else {
            os << "modulus,order,residual_count,examined,density,ci_halfwidth,mode\n";
            for (const auto& r : a.per_prime) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "%.12g,%.6g", r.density, r.half_width);
                os << r.modulus << ',' << r.size << ',' << r.count << ',' << r.examined << ',' << buf << ','
                   << (r.mode == tw::ResidualMode::Enumerate ? "enumerate" : "sample") << '\n';
            }
            std::cerr << "alpha = " << a.alpha << '\n';
        }
        return 0;
    }

    if (*bound) {
        if (b_kind == "chebyshev") {
            const tw::Rational v = tw::chebyshev_bound(tw::parse_rational(b_beta), tw::parse_rational(b_delta), b_t);
            if (json) os << nlohmann::json{{"chebyshev_bound", tw::rational_to_string(v)}, {"approx", tw::to_double(v)}}.dump(2) << '\n';
            else os << "beta,delta,t,bound\n" << b_beta << ',' << b_delta << ',' << b_t << ',' << tw::rational_to_string(v) << '\n';
            return 0;
        }
        if (b_kind == "single-prime") {
            const std::optional<double> pi = b_pi >= 0 ? std::optional<double>(b_pi) : std::nullopt;
            const double d = tw::to_double(tw::parse_rational(b_density));
            const auto grid = tw::parse_grid(c.grid);
            if (!json) os << "n,bound,regime\n";
            nlohmann::json j = nlohmann::json::array();
            for (auto n : grid) {
                const double v = tw::single_prime_bound(tw::parse_bigint(b_order), d, b_a, n, pi);
                if (json) j.push_back({{"n", n}, {"bound", v}, {"regime", "single-prime"}});
                else os << n << ',' << v << ",single-prime\n";
            }
            if (json) os << j.dump(2) << '\n';
            return 0;
        }
        tw::SieveInputs in;
        in.a_size = b_a;
        in.C = tw::parse_rational(b_c);
        in.D = b_d;
        in.alpha = tw::parse_rational(b_alpha);
        if (b_kind == "threshold") {
            const auto b = tw::sieve_threshold_and_bound(in, b_t);
            if (json) os << b.to_json().dump(2) << '\n';
            else os << "t,n_min,bound,regime\n" << b.t << ',' << tw::rational_to_string(b.n_min) << ','
                    << tw::rational_to_string(b.bound) << ',' << b.regime << '\n';
            return 0;
        }
        const auto grid = tw::parse_grid(c.grid);
        nlohmann::json j = nlohmann::json::array();
        if (!json) os << tw::sieve_table_header() << '\n';
        for (auto n : grid) {
            const auto b = tw::plan_for_n(tw::BigInt(n), in);
            if (json) {
                auto row = b.to_json();
                row["n"] = n;
                j.push_back(row);
            } else {
                os << tw::sieve_table_row(tw::BigInt(n), b) << '\n';
            }
        }
        if (json) os << j.dump(2) << '\n';
        return 0;
    }

    if (*experiment) {
        const tw::Scenario s = load_scenario(ex_scenario, ex_config);
        tw::ExperimentOptions opt;
        opt.mode = ex_exact ? tw::ExperimentMode::Exact : tw::ExperimentMode::MonteCarlo;
        opt.threads = c.threads;
        opt.exact_budget = ex_budget;
        const auto table = tw::run_experiment(s, tw::parse_grid(c.grid), c.trials, c.seed, opt);
        if (json) os << table.to_json().dump(2) << '\n';
        else table.write_csv(os);
        if (ex_fit) {
            try {
                std::cerr << tw::fit_decay(tw::fit_points(table)).to_json().dump() << '\n';
            } catch (const tw::InsufficientData& e) {
                std::cerr << e.what() << '\n';
            }
        }
        return 0;
    }

    if (*fit) {
        std::vector<tw::FitPoint> pts;
        if (fit_in.empty()) {
            pts = tw::parse_experiment_csv(std::cin);
        } else {
            std::ifstream in(fit_in);
            if (!in) throw tw::ConfigError("cannot read " + fit_in);
            pts = tw::parse_experiment_csv(in);
        }
        const auto f = tw::fit_decay(pts, fit_min_trials);
        if (json) {
            os << f.to_json().dump(2) << '\n';
        } else {
            char buf[256];
            std::snprintf(buf, sizeof buf, "%s,%.8g,%.8g,%.8g,%.8g,%g,%g,%zu,%zu\n", f.model.c_str(), f.rate, f.exp_r2,
                          f.exponent, f.poly_r2, f.n_lo, f.n_hi, f.used, f.censored);
            os << "model,rate,exp_r2,exponent,poly_r2,n_lo,n_hi,used,censored\n" << buf;
        }
        return 0;
    }

    if (*scenarios) {
        if (!sc_describe.empty()) {
            os << tw::describe(sc_describe).dump(2) << '\n';
            return 0;
        }
        if (json) {
            nlohmann::json j = nlohmann::json::array();
            for (const auto& s : tw::builtin_scenarios()) j.push_back({{"name", s.name}, {"description", s.description}});
            os << j.dump(2) << '\n';
        } else {
            os << "name,group,oracle,expected\n";
            for (const auto& s : tw::builtin_scenarios()) {
                os << s.name << ',' << s.group << ',' << tw::to_string(s.oracle.kind) << ',' << s.expected << '\n';
            }
        }
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const tw::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return tw::exit_code_for(e.kind());
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
