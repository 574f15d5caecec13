#include <gtest/gtest.h>

#include <map>

#include "thinwalk/thinsets.hpp"
#include "thinwalk/walker.hpp"

using namespace thinwalk;

namespace {

auto z_gens() { return validate_generators(lattice_generators(1)); }

struct Everything {
    template <class E>
    OracleVerdict operator()(const E&) const { return OracleVerdict::in("all"); }
};
struct Nothing {
    template <class E>
    OracleVerdict operator()(const E&) const { return OracleVerdict::out("none"); }
};
struct Origin {
    OracleVerdict operator()(const AbelianElement& a) const {
        return a.is_identity() ? OracleVerdict::in("origin") : OracleVerdict::out("off origin");
    }
};
struct Undecided {
    template <class E>
    OracleVerdict operator()(const E&) const { return OracleVerdict::unknown("no idea"); }
};

}  // namespace

TEST(RunWalk, LengthZeroIsIdentity) {
    WalkConfig<MatrixElement> cfg{validate_generators(sl2_st_generators()), 0, 1, 7};
    const auto path = run_walk(cfg, 0);
    ASSERT_EQ(path.size(), 1U);
    EXPECT_TRUE(path[0].is_identity());
}

TEST(RunWalk, Deterministic) {
    WalkConfig<MatrixElement> cfg{validate_generators(sl2_st_generators()), 50, 10, 7};
    EXPECT_EQ(run_walk(cfg, 3), run_walk(cfg, 3));
    EXPECT_NE(run_walk(cfg, 3).back(), run_walk(cfg, 4).back());
}

TEST(RunWalk, StepsAreGeneratorMultiplications) {
    const auto gens = validate_generators(sl2_st_generators());
    WalkConfig<MatrixElement> cfg{gens, 30, 1, 11};
    const auto path = run_walk(cfg, 0);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const auto step = compose(inverse(path[k]), path[k + 1]);
        EXPECT_NE(std::find(gens.distinct().begin(), gens.distinct().end(), step), gens.distinct().end());
    }
}

TEST(RunWalk, LineWalkStaysInRange) {
    WalkConfig<AbelianElement> cfg{z_gens(), 10000, 3, 5};
    for (std::uint64_t t = 0; t < 3; ++t) {
        const auto path = run_walk(cfg, t);
        for (const auto& x : path) ASSERT_LE(boost::multiprecision::abs(x[0]), 10000);
    }
}

TEST(RunWalk, TrialIndexOutOfRange) {
    WalkConfig<AbelianElement> cfg{z_gens(), 3, 2, 5};
    EXPECT_THROW(run_walk(cfg, 2), ConfigError);
    cfg.trials = 0;
    EXPECT_THROW(run_walk(cfg, 0), ConfigError);
}

TEST(ExactDistribution, TwoStepsOnZ) {
    const auto d = exact_distribution(z_gens(), 2);
    // of the 9 two-step paths, (0,0), (1,-1), (-1,1) return to 0
    EXPECT_EQ(d.probability(AbelianElement{0}), Rational(1, 3));
    EXPECT_EQ(d.probability(AbelianElement{2}), Rational(1, 9));
    EXPECT_EQ(d.probability(AbelianElement{1}), Rational(2, 9));
    EXPECT_EQ(d.total_mass(), 1);
}

TEST(ExactDistribution, OneStepAndZeroSteps) {
    const auto d0 = exact_distribution(z_gens(), 0);
    EXPECT_EQ(d0.counts.size(), 1U);
    EXPECT_EQ(d0.probability(AbelianElement{0}), 1);
    const auto d1 = exact_distribution(z_gens(), 1);
    for (long long k : {-1, 0, 1}) EXPECT_EQ(d1.probability(AbelianElement{k}), Rational(1, 3));
}

TEST(ExactDistribution, BudgetExceeded) {
    EXPECT_THROW(exact_distribution(validate_generators(sl2_st_generators()), 8, 100), BudgetExceeded);
}

TEST(ExactDistribution, MassIsOneAndDenominatorsDivide) {
    for (std::uint64_t n = 0; n <= 7; ++n) {
        const auto gens = validate_generators(sl2_st_generators());
        const auto d = exact_distribution(gens, n);
        EXPECT_EQ(d.total_mass(), 1);
        for (const auto& [g, c] : d.counts) {
            const Rational p = d.probability(g);
            EXPECT_EQ(d.denominator % boost::multiprecision::denominator(p), 0);
        }
    }
}

TEST(ExactDistribution, LineWalkIsSymmetric) {
    const auto d = exact_distribution(z_gens(), 25);
    for (long long k = 0; k <= 25; ++k) {
        EXPECT_EQ(d.probability(AbelianElement{k}), d.probability(AbelianElement{-k}));
    }
}

TEST(ExactDistribution, JsonSortedAndExact) {
    const auto j = exact_distribution(z_gens(), 1).to_json();
    EXPECT_EQ(j["support"].size(), 3U);
    EXPECT_EQ(j["support"][0]["probability"], "1/3");
}

TEST(HitProbabilityExact, OriginAtTwoSteps) {
    EXPECT_EQ(hit_probability_exact(z_gens(), 2, Origin{}), Rational(1, 3));
    EXPECT_EQ(hit_probability_exact(z_gens(), 5, Everything{}), 1);
    EXPECT_EQ(hit_probability_exact(z_gens(), 5, Nothing{}), 0);
    EXPECT_THROW(hit_probability_exact(z_gens(), 2, Undecided{}), UndecidedMembership);
}

TEST(HitProbabilityExact, GridMatchesPointwiseAndDenseLine) {
    const std::vector<std::uint64_t> grid{0, 1, 2, 5, 9, 16};
    const auto sparse = hit_probability_exact_grid(z_gens(), grid, Origin{});
    const auto dense = line_hit_probability_exact_grid(z_gens(), grid, Origin{});
    for (std::size_t k = 0; k < grid.size(); ++k) {
        EXPECT_EQ(sparse[k], hit_probability_exact(z_gens(), grid[k], Origin{}));
        EXPECT_EQ(dense[k], sparse[k]);
    }
}

// P(w_n = 0) on Z is the central trinomial coefficient over 3^n.
TEST(HitProbabilityExact, CentralTrinomialCoefficients) {
    const std::vector<std::uint64_t> grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const std::vector<long long> trinomial{1, 3, 7, 19, 51, 141, 393, 1107, 3139, 8953};
    const auto p = line_hit_probability_exact_grid(z_gens(), grid, Origin{});
    for (std::size_t k = 0; k < grid.size(); ++k) {
        EXPECT_EQ(p[k], Rational(BigInt(trinomial[k]), ipow(BigInt(3), static_cast<unsigned>(grid[k]))));
    }
}

TEST(HitProbabilityMc, Extremes) {
    const auto all = hit_probability_mc(z_gens(), 7, Everything{}, 500, 1);
    EXPECT_EQ(all.estimate, 1.0);
    EXPECT_EQ(all.half_width, 0.0);
    const auto one = hit_probability_mc(z_gens(), 7, Origin{}, 1, 1);
    EXPECT_TRUE(one.estimate == 0.0 || one.estimate == 1.0);
    const auto unk = hit_probability_mc(z_gens(), 3, Undecided{}, 100, 1);
    EXPECT_EQ(unk.unknown, 100U);
    EXPECT_EQ(unk.hits, 0U);
}

TEST(HitProbabilityMc, OriginNearOneThird) {
    const auto e = hit_probability_mc(z_gens(), 2, Origin{}, 100000, 42);
    EXPECT_NEAR(e.estimate, 1.0 / 3.0, 0.01);
    EXPECT_NEAR(e.half_width, 1.96 * std::sqrt(e.estimate * (1 - e.estimate) / 1e5), 1e-15);
}

TEST(HitProbabilityMc, IndependentOfThreadCount) {
    const auto gens = validate_generators(sl2_st_generators());
    const MatrixThinSet oracle(ThinSetSpec{ThinSetKind::Subvariety, 2, 2, {MultiPoly::sl2_parabolic()}});
    const std::vector<std::uint64_t> grid{2, 5, 9};
    const auto a = hit_probability_mc_grid(gens, grid, oracle, 3001, 9, 1);
    const auto b = hit_probability_mc_grid(gens, grid, oracle, 3001, 9, 4);
    for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_EQ(a[k].hits, b[k].hits);
}

TEST(HitProbabilityMc, SharedTrajectoryAgreesWithSingleN) {
    const auto gens = validate_generators(sl2_st_generators());
    const MatrixThinSet oracle(ThinSetSpec{ThinSetKind::Subvariety, 2, 2, {MultiPoly::sl2_parabolic()}});
    const auto grid = hit_probability_mc_grid(gens, {3, 6}, oracle, 2000, 17, 1);
    EXPECT_EQ(grid[1].hits, hit_probability_mc(gens, 6, oracle, 2000, 17, 1).hits);
}

// MC agrees with the exact oracle within three half-widths for most seeds.
TEST(HitProbabilityMc, ConvergesToExactOnSl2) {
    const auto gens = validate_generators(sl2_st_generators());
    const MatrixThinSet oracle(ThinSetSpec{ThinSetKind::Subvariety, 2, 2, {MultiPoly::sl2_parabolic()}});
    for (std::uint64_t n : {4, 6}) {
        const double exact = to_double(hit_probability_exact(gens, n, oracle));
        int good = 0;
        const int seeds = 20;
        for (int s = 0; s < seeds; ++s) {
            const auto e = hit_probability_mc(gens, n, oracle, 20000, 1000 + s, 1);
            good += std::abs(e.estimate - exact) <= 3 * e.half_width;
        }
        EXPECT_GE(good, seeds - 1) << "n=" << n;
    }
}
