#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "thinwalk/lab.hpp"

using namespace thinwalk;

namespace {

ExperimentOptions exact_mode() {
    ExperimentOptions o;
    o.mode = ExperimentMode::Exact;
    return o;
}

Scenario empty_scenario() {
    Scenario s = find_scenario("sl2_trace");
    s.name = "never";
    s.plan.regime = "none";
    s.oracle.polys = {MultiPoly::constant(4, 1)};
    return s;
}

std::string csv_of(const ExperimentTable& t) {
    std::ostringstream os;
    t.write_csv(os);
    return os.str();
}

}  // namespace

TEST(Scenarios, Inventory) {
    const auto names = list_scenarios();
    for (const char* want : {"sl2_trace", "sl3_galois", "z_origin", "torus_squares", "sl2_fixed_flag"}) {
        EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
    }
    const auto d = describe("sl2_trace");
    EXPECT_NE(d.at("description").get<std::string>().find("trace in {-2,2}"), std::string::npos);
    EXPECT_EQ(d.at("schema_version"), kScenarioSchemaVersion);
    EXPECT_THROW(describe("sl4_nothing"), ConfigError);
    for (const auto& s : builtin_scenarios()) EXPECT_NO_THROW(s.validate()) << s.name;
}

TEST(Scenarios, JsonRoundTripAndValidation) {
    for (const auto& s : builtin_scenarios()) {
        const auto back = Scenario::from_json(s.to_json());
        EXPECT_EQ(back.to_json(), s.to_json()) << s.name;
    }
    auto j = find_scenario("torus_squares").to_json();
    j.erase("schema_version");
    EXPECT_THROW(Scenario::from_json(j), ConfigError);
    j["schema_version"] = 2;
    EXPECT_THROW(Scenario::from_json(j), ConfigError);
    j["schema_version"] = 1;
    j["group"] = "sl2";
    EXPECT_THROW(Scenario::from_json(j), ConfigError);  // TORUS_SQUARES only on torus_23
    auto k = find_scenario("z_origin").to_json();
    k["expected"] = "sometimes";
    EXPECT_THROW(Scenario::from_json(k), ConfigError);
}

TEST(Scenarios, ExplicitGenerators) {
    auto j = find_scenario("sl2_trace").to_json();
    j["generators"] = "explicit";
    j["explicit_generators"] = {{{1, 0}, {0, 1}}, {{1, 2}, {0, 1}}, {{1, -2}, {0, 1}}, {{1, 0}, {2, 1}}, {{1, 0}, {-2, 1}}};
    j["plan"] = {{"regime", "none"}};
    const auto s = Scenario::from_json(j);
    const auto gens = matrix_generators(s);
    EXPECT_EQ(gens.size(), 5U);
    const auto t = run_experiment(s, {1, 2}, 0, 0, exact_mode());
    EXPECT_EQ(*t.rows[0].exact, Rational(1));  // every generator is unipotent
    EXPECT_LT(*t.rows[1].exact, Rational(1));
}

TEST(Grid, Parsing) {
    EXPECT_EQ(parse_grid("8,2,4,4"), (std::vector<std::uint64_t>{2, 4, 8}));
    EXPECT_EQ(parse_grid("geometric:16:2048"), (std::vector<std::uint64_t>{16, 32, 64, 128, 256, 512, 1024, 2048}));
    EXPECT_EQ(parse_grid("range:4:16:4"), (std::vector<std::uint64_t>{4, 8, 12, 16}));
    EXPECT_EQ(parse_grid("range:4:64:4").size(), 16U);
    for (const char* bad : {"", "1,,2", "x", "geometric:0:8", "geometric:8:4", "range:1:5", "range:1:5:0", "-3"}) {
        EXPECT_THROW(parse_grid(bad), ConfigError) << bad;
    }
}

TEST(Experiment, LineWalkTwoSteps) {
    // 9 paths of length 2 over {0,+1,-1}; those summing to zero: (0,0), (1,-1), (-1,1)
    int zero = 0;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) zero += a + b == 0;
    const auto t = run_experiment(find_scenario("z_origin"), {2}, 0, 0, exact_mode());
    ASSERT_EQ(t.rows.size(), 1U);
    EXPECT_EQ(*t.rows[0].exact, Rational(zero, 9));
    EXPECT_EQ(*t.rows[0].exact, Rational(1, 3));
    EXPECT_EQ(t.rows[0].trials, 0U);
}

TEST(Experiment, TorusMatchesCongruenceWalk) {
    const auto s = find_scenario("torus_squares");
    const CyclicProduct z2z2({2, 2});
    const auto table = build_cayley_table(z2z2, abelian_generators(s));
    std::vector<std::uint64_t> grid;
    for (std::uint64_t n = 1; n <= 24; ++n) grid.push_back(n);
    const auto exact = run_experiment(s, grid, 0, 0, exact_mode());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto counts = finite_walk_counts(table, grid[i]);
        EXPECT_EQ(*exact.rows[i].exact, Rational(counts[0], ipow(BigInt(5), grid[i]))) << grid[i];
    }
    const auto far = finite_walk_counts(table, 200);
    const Rational limit_gap = Rational(far[0], ipow(BigInt(5), 200)) - Rational(1, 4);
    EXPECT_LT(boost::multiprecision::abs(limit_gap), Rational(1, 1'000'000'000));
}

TEST(Experiment, TorusEstimateNearQuarter) {
    const auto t = run_experiment(find_scenario("torus_squares"), {200}, 100'000, 17);
    EXPECT_NEAR(t.rows[0].estimate, 0.25, 0.01);
    EXPECT_LT(t.rows[0].ci_halfwidth, 0.005);
}

TEST(Experiment, EmptyThinSetGivesZeros) {
    const auto s = empty_scenario();
    const auto mc = run_experiment(s, {1, 5, 20}, 2000, 3);
    for (const auto& r : mc.rows) {
        EXPECT_EQ(r.hits, 0U);
        EXPECT_EQ(r.estimate, 0.0);
        EXPECT_DOUBLE_EQ(r.ci_halfwidth, 3.0 / 2000);
        EXPECT_FALSE(r.theory_bound.has_value());
    }
    for (const auto& r : run_experiment(s, {0, 3, 6}, 0, 0, exact_mode()).rows) EXPECT_EQ(*r.exact, Rational(0));
}

TEST(Experiment, ReproducibleAcrossThreads) {
    const auto s = find_scenario("sl2_trace");
    const auto grid = parse_grid("range:4:32:4");
    ExperimentOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const auto a = csv_of(run_experiment(s, grid, 20'000, 99, one));
    EXPECT_EQ(a, csv_of(run_experiment(s, grid, 20'000, 99, four)));
    EXPECT_NE(a, csv_of(run_experiment(s, grid, 20'000, 100, one)));
    EXPECT_EQ(a.substr(0, a.find('\n')), "scenario,n,trials,hits,unknown,estimate,ci_halfwidth,theory_bound,regime");
}

TEST(Experiment, UndecidedRateAboveCapAborts) {
    Scenario s = find_scenario("sl2_trace");
    s.name = "squares";
    s.plan.regime = "none";
    s.oracle = ThinSetSpec{ThinSetKind::ProperPower};
    s.oracle.search_depth = 0;
    s.oracle.primes = {3};
    s.unknown_cap = 0.0;
    EXPECT_THROW(run_experiment(s, {6}, 500, 1), UndecidedMembership);
    s.unknown_cap = 1.0;
    const auto t = run_experiment(s, {6}, 500, 1);
    EXPECT_GT(t.rows[0].unknown, 0U);
}

// Built-in plan at a single prime: exact hit probabilities for n <= 10 stay below it,
// and Monte Carlo lower confidence limits stay below it as well.
TEST(Experiment, TheoryBoundDominatesExactHits) {
    const auto s = find_scenario("sl2_trace");
    std::vector<std::uint64_t> grid;
    for (std::uint64_t n = 0; n <= 10; ++n) grid.push_back(n);
    const auto t = run_experiment(s, grid, 0, 0, exact_mode());
    for (const auto& r : t.rows) {
        ASSERT_TRUE(r.theory_bound.has_value());
        EXPECT_LE(to_double(*r.exact), *r.theory_bound) << r.n;
        EXPECT_EQ(r.regime, "single-prime");
    }
    EXPECT_EQ(*t.rows[0].exact, Rational(1));  // w_0 = I has trace 2
}

TEST(Experiment, MonteCarloAgreesWithExact) {
    const auto s = find_scenario("sl2_fixed_flag");
    const std::vector<std::uint64_t> grid{2, 4, 6, 8};
    const auto exact = run_experiment(s, grid, 0, 0, exact_mode());
    const auto mc = run_experiment(s, grid, 200'000, 4);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_NEAR(mc.rows[i].estimate, to_double(*exact.rows[i].exact), 4 * mc.rows[i].ci_halfwidth + 1e-12);
    }
}

TEST(Fit, SyntheticExponential) {
    std::vector<FitPoint> pts;
    for (int n = 4; n <= 64; n += 4) pts.push_back({double(n), std::exp(-n / 7.0), 0});
    const auto f = fit_decay(pts);
    EXPECT_EQ(f.model, "exponential");
    EXPECT_NEAR(f.rate, 1.0 / 7.0, 0.01 / 7.0);
    EXPECT_GT(f.exp_r2, 0.999);
}

TEST(Fit, SyntheticPolynomial) {
    std::vector<FitPoint> pts;
    for (int n = 16; n <= 2048; n *= 2) pts.push_back({double(n), 1.0 / std::sqrt(double(n)), 0});
    const auto f = fit_decay(pts);
    EXPECT_EQ(f.model, "polynomial");
    EXPECT_NEAR(f.exponent, -0.5, 0.005);
}

TEST(Fit, CensoringAndErrors) {
    std::vector<FitPoint> pts{{1, 0.5, 100}, {2, 0.25, 100}, {3, 0.125, 100}, {4, 0.0625, 100},
                              {5, 0.0, 100}, {6, 0.01, 100}, {7, 0.3, 5}};
    const auto f = fit_decay(pts, 10);
    EXPECT_EQ(f.used, 4U);
    EXPECT_EQ(f.censored, 2U);
    EXPECT_EQ(f.skipped, 1U);
    EXPECT_NEAR(f.rate, std::log(2.0), 1e-12);
    EXPECT_EQ(f.n_hi, 4.0);
    pts.resize(3);
    EXPECT_THROW(fit_decay(pts), InsufficientData);
    const auto windowed = fit_decay({{1, 0.5, 0}, {2, 0.25, 0}, {3, 0.125, 0}, {4, 0.0625, 0}, {50, 0.4, 0}},
                                    1, std::make_pair(0.0, 10.0));
    EXPECT_EQ(windowed.used, 4U);
}

TEST(Fit, LineWalkReturnIsPolynomial) {
    std::vector<std::uint64_t> grid;
    for (std::uint64_t n = 4; n <= 2000; n += 2) grid.push_back(n);
    const auto t = run_experiment(find_scenario("z_origin"), grid, 0, 0, exact_mode());
    const auto f = fit_decay(fit_points(t));
    EXPECT_EQ(f.model, "polynomial");
    EXPECT_NEAR(f.exponent, -0.5, 0.05);
    const double local_clt = std::sqrt(3.0 / (4.0 * std::acos(-1.0) * 2000.0));
    EXPECT_NEAR(t.rows.back().estimate / local_clt, 1.0, 0.01);
}

TEST(Fit, CsvRoundTrip) {
    const auto t = run_experiment(find_scenario("sl2_trace"), parse_grid("range:4:24:4"), 5'000, 8);
    std::istringstream in(csv_of(t));
    const auto pts = parse_experiment_csv(in);
    ASSERT_EQ(pts.size(), t.rows.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        EXPECT_EQ(pts[i].n, double(t.rows[i].n));
        EXPECT_NEAR(pts[i].p, t.rows[i].estimate, 1e-11);
        EXPECT_EQ(pts[i].trials, t.rows[i].trials);
    }
    std::istringstream bad("n,trials\n1,2\n");
    EXPECT_THROW(parse_experiment_csv(bad), ConfigError);
    const auto j = t.to_json();
    EXPECT_EQ(j.at("rows").size(), t.rows.size());
}
