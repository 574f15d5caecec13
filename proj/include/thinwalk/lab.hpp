#pragma once

// Scenarios, Monte Carlo and exact sweeps of P(w_n in Z) over a grid of n,
// and least-squares fits of the exponential and polynomial decay models.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"
#include "matgroup.hpp"
#include "quotients.hpp"
#include "sieve.hpp"
#include "spectra.hpp"
#include "thinsets.hpp"
#include "walker.hpp"

namespace thinwalk {

inline constexpr int kScenarioSchemaVersion = 1;

/// Theory bound attached to a scenario: none, the polynomial sieve plan, a single
/// prime with measured gap, or the exponential template.
struct PlanSpec {
    std::string regime = "none";  // none | polynomial | single-prime | exponential
    SieveInputs inputs;
    u64 prime = 5;
    double epsilon = 0.1;

    nlohmann::json to_json() const {
        nlohmann::json j{{"regime", regime}};
        if (regime == "polynomial") {
            j["C"] = rational_to_string(inputs.C);
            j["D"] = inputs.D;
            j["alpha"] = rational_to_string(inputs.alpha);
        }
        if (regime == "single-prime") j["prime"] = prime;
        if (regime == "exponential") j["epsilon"] = epsilon;
        return j;
    }

    static PlanSpec from_json(const nlohmann::json& j) {
        PlanSpec p;
        p.regime = j.value("regime", std::string("none"));
        auto rational_field = [&](const char* key, Rational fallback) {
            if (!j.contains(key)) return fallback;
            const auto& v = j.at(key);
            return v.is_string() ? parse_rational(v.get<std::string>()) : to_rational(v.get<double>());
        };
        if (p.regime == "polynomial") {
            p.inputs.C = rational_field("C", Rational(1));
            p.inputs.D = j.value("D", 1U);
            p.inputs.alpha = rational_field("alpha", Rational(1, 2));
        } else if (p.regime == "single-prime") {
            p.prime = j.value("prime", u64{5});
        } else if (p.regime == "exponential") {
            p.epsilon = j.value("epsilon", 0.1);
        } else if (p.regime != "none") {
            throw ConfigError("unknown plan regime '" + p.regime + "'");
        }
        return p;
    }
};

struct Scenario {
    std::string name;
    std::string description;
    std::string group = "sl2";             // sl2 | sl3 | z_additive | torus_23
    std::string generators = "st";         // st | elementary | lattice | explicit
    nlohmann::json explicit_generators;    // matrices as rows, or exponent vectors
    ThinSetSpec oracle;
    std::vector<u64> schedule{3, 5, 7};
    std::string expected = "exponential";  // exponential | polynomial | non-decaying
    PlanSpec plan;
    double unknown_cap = 0.05;

    bool is_matrix() const { return group == "sl2" || group == "sl3"; }
    unsigned dimension() const {
        if (group == "sl2") return 2;
        if (group == "sl3") return 3;
        if (group == "z_additive") return 1;
        if (group == "torus_23") return 2;
        throw ConfigError("unknown group '" + group + "'");
    }

    void validate() const {
        (void)dimension();
        if (expected != "exponential" && expected != "polynomial" && expected != "non-decaying") {
            throw ConfigError("expected regime must be exponential, polynomial or non-decaying");
        }
        if (oracle.kind == ThinSetKind::TorusSquares && group != "torus_23") {
            throw ConfigError("TORUS_SQUARES needs the torus_23 group");
        }
        if (!is_matrix()) {
            if (oracle.kind != ThinSetKind::TorusSquares && oracle.kind != ThinSetKind::ProperPower &&
                oracle.kind != ThinSetKind::Subvariety) {
                throw ConfigError(std::string(to_string(oracle.kind)) + " needs a matrix group");
            }
            if (generators != "lattice" && generators != "explicit") {
                throw ConfigError("abelian groups take lattice or explicit generators");
            }
        } else if (generators == "st" && group != "sl2") {
            throw ConfigError("S,T generators exist only for sl2");
        } else if (generators == "lattice") {
            throw ConfigError("lattice generators need an abelian group");
        }
        if (!(unknown_cap >= 0 && unknown_cap <= 1)) throw ConfigError("unknown cap must lie in [0,1]");
    }

    nlohmann::json to_json() const {
        nlohmann::json j{{"schema_version", kScenarioSchemaVersion},
                         {"name", name},
                         {"description", description},
                         {"group", group},
                         {"generators", generators},
                         {"oracle", oracle.to_json()},
                         {"schedule", schedule},
                         {"expected", expected},
                         {"plan", plan.to_json()},
                         {"unknown_cap", unknown_cap}};
        if (generators == "explicit") j["explicit_generators"] = explicit_generators;
        return j;
    }

    static Scenario from_json(const nlohmann::json& j) {
        if (!j.contains("schema_version")) throw ConfigError("scenario config lacks schema_version");
        if (j.at("schema_version").get<int>() != kScenarioSchemaVersion) {
            throw ConfigError("unsupported scenario schema_version " + j.at("schema_version").dump());
        }
        Scenario s;
        s.name = j.at("name").get<std::string>();
        s.description = j.value("description", std::string());
        s.group = j.at("group").get<std::string>();
        s.generators = j.value("generators", std::string(s.group == "sl2" ? "st" : "elementary"));
        if (s.group == "z_additive" || s.group == "torus_23") s.generators = j.value("generators", std::string("lattice"));
        if (j.contains("explicit_generators")) s.explicit_generators = j.at("explicit_generators");
        s.oracle = ThinSetSpec::from_json(j.at("oracle"));
        if (j.contains("schedule")) s.schedule = j.at("schedule").get<std::vector<u64>>();
        s.expected = j.value("expected", std::string("exponential"));
        if (j.contains("plan")) s.plan = PlanSpec::from_json(j.at("plan"));
        s.unknown_cap = j.value("unknown_cap", 0.05);
        s.validate();
        return s;
    }
};

inline GeneratorMultiset<MatrixElement> matrix_generators(const Scenario& s) {
    if (s.generators == "st") return validate_generators(sl2_st_generators());
    if (s.generators == "elementary") return validate_generators(elementary_generators(s.dimension()));
    if (s.generators == "explicit") {
        std::vector<MatrixElement> raw;
        for (const auto& m : s.explicit_generators) raw.push_back(MatrixElement::from_json(m));
        for (const auto& m : raw) {
            if (m.dimension() != s.dimension()) throw ConfigError("explicit generator has the wrong dimension");
        }
        return validate_generators(raw);
    }
    throw ConfigError("unknown generator spec '" + s.generators + "' for " + s.group);
}

inline GeneratorMultiset<AbelianElement> abelian_generators(const Scenario& s) {
    if (s.generators == "lattice") return validate_generators(lattice_generators(s.dimension()));
    if (s.generators == "explicit") {
        std::vector<AbelianElement> raw;
        for (const auto& v : s.explicit_generators) raw.push_back(AbelianElement::from_json(v));
        for (const auto& a : raw) {
            if (a.rank() != s.dimension()) throw ConfigError("explicit generator has the wrong rank");
        }
        return validate_generators(raw);
    }
    throw ConfigError("unknown generator spec '" + s.generators + "' for " + s.group);
}

inline std::vector<Scenario> builtin_scenarios() {
    std::vector<Scenario> out;
    {
        Scenario s;
        s.name = "sl2_trace";
        s.description = "SL_2(Z) with A = {I, S^{+-1}, T^{+-1}}; thin set {trace in {-2,2}}, which for SL_2 is also "
                        "the reducible and the non-generic Galois locus";
        s.group = "sl2";
        s.generators = "st";
        s.oracle.kind = ThinSetKind::Subvariety;
        s.oracle.polys = {MultiPoly::sl2_parabolic()};
        s.oracle.complexity = 2;
        s.expected = "exponential";
        s.plan.regime = "single-prime";
        s.plan.prime = 7;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "sl3_galois";
        s.description = "SL_3(Z) with elementary generators; thin set {Galois group of the characteristic "
                        "polynomial is not S_3}";
        s.group = "sl3";
        s.generators = "elementary";
        s.oracle.kind = ThinSetKind::NongenericGalois;
        s.oracle.complexity = 3;
        s.expected = "exponential";
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "z_origin";
        s.description = "Lazy walk on Z with A = {0, +-1}; thin set {0}, hit with probability of order n^{-1/2}";
        s.group = "z_additive";
        s.generators = "lattice";
        s.oracle.kind = ThinSetKind::Subvariety;
        s.oracle.polys = {MultiPoly::coordinate(1, 0)};
        s.oracle.complexity = 1;
        s.expected = "polynomial";
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "torus_squares";
        s.description = "Multiplicative lattice <2,3> ~ Z^2 with A = {0, +-e_1, +-e_2}; thin set of squares "
                        "(all exponents even), a finite-index subgroup hit with limiting probability 1/4";
        s.group = "torus_23";
        s.generators = "lattice";
        s.oracle.kind = ThinSetKind::TorusSquares;
        s.oracle.complexity = 2;
        s.expected = "non-decaying";
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "sl2_fixed_flag";
        s.description = "SL_2(Z) with A = {I, S^{+-1}, T^{+-1}}; thin set of elements fixing a rational line "
                        "(det(g - I) = 0 or det(g + I) = 0)";
        s.group = "sl2";
        s.generators = "st";
        s.oracle.kind = ThinSetKind::RationalFixedFlag;
        s.oracle.flag = FlagType::Line;
        s.oracle.complexity = 2;
        s.expected = "exponential";
        out.push_back(s);
    }
    return out;
}

inline std::vector<std::string> list_scenarios() {
    std::vector<std::string> names;
    for (const auto& s : builtin_scenarios()) names.push_back(s.name);
    return names;
}

inline Scenario find_scenario(const std::string& name) {
    for (auto& s : builtin_scenarios()) {
        if (s.name == name) return s;
    }
    throw ConfigError("unknown scenario '" + name + "'");
}

inline nlohmann::json describe(const std::string& name) { return find_scenario(name).to_json(); }

// ---------------------------------------------------------------------------
// Grids.

inline std::vector<std::uint64_t> parse_grid(const std::string& text) {
    std::vector<std::uint64_t> grid;
    auto number = [](const std::string& t) -> std::uint64_t {
        if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
            throw ConfigError("bad grid entry '" + t + "'");
        }
        return std::stoull(t);
    };
    auto fields = [](const std::string& t, char sep) {
        std::vector<std::string> out;
        std::stringstream ss(t);
        std::string item;
        while (std::getline(ss, item, sep)) out.push_back(item);
        return out;
    };
    if (text.rfind("geometric:", 0) == 0 || text.rfind("range:", 0) == 0) {
        const auto parts = fields(text, ':');
        const bool geometric = parts[0] == "geometric";
        if (parts.size() != (geometric ? 3U : 4U)) throw ConfigError("grid must be geometric:start:stop or range:start:stop:step");
        const std::uint64_t start = number(parts[1]), stop = number(parts[2]);
        const std::uint64_t step = geometric ? 0 : number(parts[3]);
        if (start < 1 || stop < start) throw ConfigError("grid needs 1 <= start <= stop");
        if (!geometric && step < 1) throw ConfigError("range step must be positive");
        for (std::uint64_t n = start; n <= stop; n = geometric ? n * 2 : n + step) grid.push_back(n);
    } else {
        for (const auto& f : fields(text, ',')) grid.push_back(number(f));
    }
    if (grid.empty()) throw ConfigError("empty grid");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

// ---------------------------------------------------------------------------
// Experiments.

struct ExperimentRow {
    std::string scenario;
    std::uint64_t n = 0;
    std::uint64_t trials = 0;  // 0 in exact mode
    std::uint64_t hits = 0;
    std::uint64_t unknown = 0;
    double estimate = 0.0;
    double ci_halfwidth = 0.0;  // rule of three 3/m when no hit was seen
    std::optional<double> theory_bound;
    std::string regime;
    std::optional<Rational> exact;
};

struct ExperimentTable {
    std::vector<ExperimentRow> rows;

    static std::string csv_header() { return "scenario,n,trials,hits,unknown,estimate,ci_halfwidth,theory_bound,regime"; }

    void write_csv(std::ostream& os) const {
        os << csv_header() << '\n';
        char buf[64];
        for (const auto& r : rows) {
            os << r.scenario << ',' << r.n << ',' << r.trials << ',' << r.hits << ',' << r.unknown << ',';
            std::snprintf(buf, sizeof buf, "%.12g", r.estimate);
            os << buf << ',';
            std::snprintf(buf, sizeof buf, "%.12g", r.ci_halfwidth);
            os << buf << ',';
            if (r.theory_bound) {
                std::snprintf(buf, sizeof buf, "%.12g", *r.theory_bound);
                os << buf;
            }
            os << ',' << r.regime << '\n';
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json rows_j = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json j{{"scenario", r.scenario}, {"n", r.n},           {"trials", r.trials},
                             {"hits", r.hits},         {"unknown", r.unknown}, {"estimate", r.estimate},
                             {"ci_halfwidth", r.ci_halfwidth}, {"regime", r.regime}};
            j["theory_bound"] = r.theory_bound ? nlohmann::json(*r.theory_bound) : nlohmann::json(nullptr);
            if (r.exact) j["exact"] = rational_to_string(*r.exact);
            rows_j.push_back(j);
        }
        return {{"rows", rows_j}};
    }
};

enum class ExperimentMode { MonteCarlo, Exact };

struct ExperimentOptions {
    ExperimentMode mode = ExperimentMode::MonteCarlo;
    unsigned threads = 0;
    std::size_t exact_budget = kDefaultExactBudget;
    bool with_theory = true;
};

namespace detail {

/// P(w_n in Z) <= density + count * sqrt(order) * pi_*^n at one prime, over the image of Gamma.
template <FiniteGroup G, class ThinSet>
struct SinglePrimeTheory {
    BigInt order = 0;
    double density = 0.0;
    double pi_star = 1.0;
    unsigned a_size = 1;

    SinglePrimeTheory(const G& group, const GeneratorMultiset<typename G::source_type>& gens, const ThinSet& oracle) {
        const CayleyTable table = build_cayley_table(group, gens, 200'000);
        std::size_t hit = 0;
        for (u64 code : table.codes) hit += oracle.residual_contains(group, group.decode(code));
        order = table.order();
        density = static_cast<double>(hit) / static_cast<double>(table.order());
        // round the density up to a representable value
        density = std::nextafter(density, 2.0);
        density = std::min(density, 1.0);
        pi_star = second_eigenvalue(table).pi_star_upper();
        a_size = table.a_size;
    }

    double bound(std::uint64_t n) const { return single_prime_bound(order, density, a_size, n, pi_star); }
};

template <class E, class ThinSet, class TheoryFn>
ExperimentTable run_with(const Scenario& s, const GeneratorMultiset<E>& gens, const ThinSet& oracle,
                         const std::vector<std::uint64_t>& grid, std::uint64_t trials, std::uint64_t seed,
                         const ExperimentOptions& opt, TheoryFn&& theory) {
    ExperimentTable table;
    const std::string regime = s.plan.regime == "none" ? s.expected : s.plan.regime;
    auto row_for = [&](std::uint64_t n) {
        ExperimentRow r;
        r.scenario = s.name;
        r.n = n;
        r.regime = regime;
        if (opt.with_theory) r.theory_bound = theory(n);
        return r;
    };
    if (opt.mode == ExperimentMode::Exact) {
        std::vector<Rational> probs;
        if constexpr (std::is_same_v<E, AbelianElement>) {
            if (gens.identity().rank() == 1) probs = line_hit_probability_exact_grid(gens, grid, oracle, opt.exact_budget);
            else probs = hit_probability_exact_grid(gens, grid, oracle, opt.exact_budget);
        } else {
            probs = hit_probability_exact_grid(gens, grid, oracle, opt.exact_budget);
        }
        for (std::size_t k = 0; k < grid.size(); ++k) {
            ExperimentRow r = row_for(grid[k]);
            r.exact = probs[k];
            r.estimate = to_double(probs[k]);
            table.rows.push_back(std::move(r));
        }
        return table;
    }
    const auto estimates = hit_probability_mc_grid(gens, grid, oracle, trials, seed, opt.threads);
    for (const auto& e : estimates) {
        if (e.unknown_rate() > s.unknown_cap) {
            throw UndecidedMembership("scenario " + s.name + " at n=" + std::to_string(e.n) + ": UNKNOWN rate " +
                                      std::to_string(e.unknown_rate()) + " exceeds cap " + std::to_string(s.unknown_cap));
        }
        ExperimentRow r = row_for(e.n);
        r.trials = e.trials;
        r.hits = e.hits;
        r.unknown = e.unknown;
        r.estimate = e.estimate;
        r.ci_halfwidth = e.hits == 0 ? 3.0 / static_cast<double>(e.trials) : e.half_width;
        table.rows.push_back(std::move(r));
    }
    return table;
}

}  // namespace detail

inline ExperimentTable run_experiment(const Scenario& s, const std::vector<std::uint64_t>& grid, std::uint64_t trials,
                                      std::uint64_t seed, const ExperimentOptions& opt = {}) {
    s.validate();
    if (grid.empty()) throw ConfigError("empty grid");
    if (opt.mode == ExperimentMode::MonteCarlo && trials < 1) throw ConfigError("trial count must be at least 1");
    std::vector<std::uint64_t> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    if (s.is_matrix()) {
        const auto gens = matrix_generators(s);
        const MatrixThinSet oracle(s.oracle, gens);
        std::function<std::optional<double>(std::uint64_t)> theory = [](std::uint64_t) { return std::nullopt; };
        if (s.plan.regime == "polynomial") {
            SieveInputs in = s.plan.inputs;
            in.a_size = static_cast<unsigned>(gens.size());
            theory = [in](std::uint64_t n) { return std::optional<double>(to_double(plan_for_n(BigInt(n), in).bound)); };
        } else if (s.plan.regime == "single-prime") {
            auto sp = std::make_shared<detail::SinglePrimeTheory<SlModPrime, MatrixThinSet>>(
                SlModPrime(s.dimension(), s.plan.prime), gens, oracle);
            theory = [sp](std::uint64_t n) { return std::optional<double>(sp->bound(n)); };
        } else if (s.plan.regime == "exponential") {
            const auto tmpl = ExponentialTemplate::from_epsilon(s.plan.epsilon);
            theory = [tmpl](std::uint64_t n) { return std::optional<double>(tmpl.bound(n)); };
        }
        ExperimentOptions o = opt;
        o.with_theory = opt.with_theory && s.plan.regime != "none";
        return detail::run_with(s, gens, oracle, sorted, trials, seed, o, theory);
    }
    const auto gens = abelian_generators(s);
    const AbelianThinSet oracle(s.oracle);
    std::function<std::optional<double>(std::uint64_t)> theory = [](std::uint64_t) { return std::nullopt; };
    if (s.plan.regime == "polynomial") {
        SieveInputs in = s.plan.inputs;
        in.a_size = static_cast<unsigned>(gens.size());
        theory = [in](std::uint64_t n) { return std::optional<double>(to_double(plan_for_n(BigInt(n), in).bound)); };
    } else if (s.plan.regime == "single-prime") {
        auto sp = std::make_shared<detail::SinglePrimeTheory<CyclicProduct, AbelianThinSet>>(
            CyclicProduct(std::vector<u64>(s.dimension(), s.plan.prime)), gens, oracle);
        theory = [sp](std::uint64_t n) { return std::optional<double>(sp->bound(n)); };
    } else if (s.plan.regime == "exponential") {
        const auto tmpl = ExponentialTemplate::from_epsilon(s.plan.epsilon);
        theory = [tmpl](std::uint64_t n) { return std::optional<double>(tmpl.bound(n)); };
    }
    ExperimentOptions o = opt;
    o.with_theory = opt.with_theory && s.plan.regime != "none";
    return detail::run_with(s, gens, oracle, sorted, trials, seed, o, theory);
}

// ---------------------------------------------------------------------------
// Decay fits.

struct FitPoint {
    double n = 0.0;
    double p = 0.0;
    std::uint64_t trials = 0;  // 0 marks an exact value
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) throw ConfigError("InsufficientData: all fit points share one n");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
    }
    f.r2 = syy == 0 ? (ss_res == 0 ? 1.0 : 0.0) : 1.0 - ss_res / syy;
    return f;
}

struct InsufficientData : ConfigError {
    using ConfigError::ConfigError;
};

struct DecayFit {
    std::string model;          // exponential | polynomial
    double rate = 0.0;          // exponential: P ~ exp(-rate n)
    double exp_intercept = 0.0;
    double exp_r2 = 0.0;
    double exponent = 0.0;      // polynomial: P ~ n^exponent
    double poly_intercept = 0.0;
    double poly_r2 = 0.0;
    double n_lo = 0.0, n_hi = 0.0;
    std::size_t used = 0;
    std::size_t censored = 0;   // zero estimates and everything after the first one
    std::size_t skipped = 0;    // below the minimum trial count

    nlohmann::json to_json() const {
        return {{"model", model},       {"rate", rate},         {"exp_r2", exp_r2},
                {"exponent", exponent}, {"poly_r2", poly_r2},   {"n_window", {n_lo, n_hi}},
                {"used", used},         {"censored", censored}, {"skipped", skipped}};
    }
};

/// Fits log P against n and against log n on the uncensored window: the points
/// before the first zero estimate. Needs at least four usable points.
inline DecayFit fit_decay(std::vector<FitPoint> points, std::uint64_t min_trials = 1,
                          std::optional<std::pair<double, double>> window = std::nullopt) {
    std::sort(points.begin(), points.end(), [](const FitPoint& a, const FitPoint& b) { return a.n < b.n; });
    DecayFit fit;
    std::vector<double> xs, logn, ys;
    bool censoring = false;
    for (const auto& pt : points) {
        if (window && (pt.n < window->first || pt.n > window->second)) continue;
        if (pt.trials != 0 && pt.trials < min_trials) {
            ++fit.skipped;
            continue;
        }
        if (censoring || !(pt.p > 0)) {
            censoring = true;
            ++fit.censored;
            continue;
        }
        if (!(pt.n > 0)) throw ConfigError("fit points need n > 0");
        xs.push_back(pt.n);
        logn.push_back(std::log(pt.n));
        ys.push_back(std::log(pt.p));
    }
    if (xs.size() < 4) {
        throw InsufficientData("InsufficientData: " + std::to_string(xs.size()) + " usable points, need 4");
    }
    const LineFit e = least_squares(xs, ys);
    const LineFit p = least_squares(logn, ys);
    fit.rate = -e.slope;
    fit.exp_intercept = e.intercept;
    fit.exp_r2 = e.r2;
    fit.exponent = p.slope;
    fit.poly_intercept = p.intercept;
    fit.poly_r2 = p.r2;
    fit.model = e.r2 >= p.r2 ? "exponential" : "polynomial";
    fit.n_lo = xs.front();
    fit.n_hi = xs.back();
    fit.used = xs.size();
    return fit;
}

inline std::vector<FitPoint> fit_points(const ExperimentTable& t) {
    std::vector<FitPoint> pts;
    for (const auto& r : t.rows) pts.push_back({static_cast<double>(r.n), r.estimate, r.trials});
    return pts;
}

/// Reads the experiment CSV back into fit points.
inline std::vector<FitPoint> parse_experiment_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty experiment table");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) header.push_back(f);
    }
    auto col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ConfigError("experiment table lacks column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t cn = col("n"), ct = col("trials"), ce = col("estimate");
    std::vector<FitPoint> pts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (f.size() <= std::max({cn, ct, ce})) throw ConfigError("short row in experiment table");
        try {
            pts.push_back({std::stod(f[cn]), std::stod(f[ce]), std::stoull(f[ct])});
        } catch (const std::exception&) {
            throw ConfigError("malformed row in experiment table: " + line);
        }
    }
    return pts;
}

}  // namespace thinwalk
