#include <gmpxx.h>
#include <gtest/gtest.h>

#include <vector>

#include "thinwalk/matgroup.hpp"
#include "thinwalk/rng.hpp"
#include "thinwalk/walker.hpp"

using namespace thinwalk;

namespace {

MatrixElement random_word(const GeneratorMultiset<MatrixElement>& gens, std::uint64_t length, std::uint64_t trial,
                          std::uint64_t seed = 99) {
    WalkConfig<MatrixElement> cfg{gens, length, trial + 1, seed};
    return run_walk(cfg, trial).back();
}

// Cofactor expansion over GMP integers, independent of the Bareiss routine.
mpz_class cofactor_det(const std::vector<mpz_class>& a, std::size_t n) {
    if (n == 1) return a[0];
    mpz_class det = 0;
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<mpz_class> minor;
        for (std::size_t i = 1; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (j != c) minor.push_back(a[i * n + j]);
            }
        }
        const mpz_class term = a[c] * cofactor_det(minor, n - 1);
        det += (c % 2 == 0) ? term : mpz_class(-term);
    }
    return det;
}

std::vector<mpz_class> to_gmp(const MatrixElement& g) {
    std::vector<mpz_class> out;
    for (const auto& e : g.entries()) out.emplace_back(e.str());
    return out;
}

}  // namespace

TEST(Compose, IdentityIsNeutral) {
    const auto g = MatrixElement::from_rows({{2, 1}, {1, 1}});
    EXPECT_EQ(compose(MatrixElement::identity(2), g), g);
    EXPECT_EQ(compose(g, MatrixElement::identity(2)), g);
}

TEST(Compose, TwoByTwoProduct) {
    const auto a = MatrixElement::from_rows({{1, 1}, {0, 1}});
    const auto b = MatrixElement::from_rows({{1, 0}, {1, 1}});
    EXPECT_EQ(compose(a, b), MatrixElement::from_rows({{2, 1}, {1, 1}}));
}

TEST(Compose, Associative) {
    const auto gens = validate_generators(sl2_st_generators());
    const auto a = random_word(gens, 15, 0), b = random_word(gens, 15, 1), c = random_word(gens, 15, 2);
    EXPECT_EQ(compose(compose(a, b), c), compose(a, compose(b, c)));
}

TEST(Compose, DimensionMismatchThrows) {
    EXPECT_THROW(compose(MatrixElement::identity(2), MatrixElement::identity(3)), ConfigError);
}

TEST(MatrixElement, RejectsDeterminantOtherThanOne) {
    EXPECT_THROW(MatrixElement::from_rows({{2, 0}, {0, 1}}), DomainError);
    EXPECT_THROW(MatrixElement::from_rows({{0, 1}, {1, 0}}), DomainError);
}

TEST(MatrixElement, JsonRoundTripUsesDecimalStrings) {
    const auto g = random_word(validate_generators(sl2_st_generators()), 60, 3);
    const auto j = g.to_json();
    ASSERT_TRUE(j[0][0].is_string());
    EXPECT_EQ(MatrixElement::from_json(j), g);
}

TEST(CharPoly, SpecExamples) {
    EXPECT_EQ(char_poly(MatrixElement::identity(2)), IntPolynomial({1, -2, 1}));
    EXPECT_EQ(char_poly(MatrixElement::from_rows({{1, 1}, {0, 1}})), IntPolynomial({1, -2, 1}));
    EXPECT_EQ(char_poly(MatrixElement::from_rows({{2, 1}, {1, 1}})), IntPolynomial({1, -3, 1}));
}

TEST(CharPoly, ConstantTermAndTrace) {
    const auto gens = validate_generators(elementary_generators(3));
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto g = random_word(gens, 30, t);
        const auto chi = char_poly(g);
        ASSERT_EQ(chi.degree(), 3U);
        EXPECT_EQ(chi[0], BigInt(-1));  // (-1)^3 det g
        EXPECT_EQ(chi[2], -g.trace());
    }
}

TEST(CharPoly, SimilarityInvariance) {
    for (auto n : {2U, 3U}) {
        const auto gens = validate_generators(n == 2 ? sl2_st_generators() : elementary_generators(3));
        for (std::uint64_t t = 0; t < 40; ++t) {
            const auto g = random_word(gens, 25, 2 * t);
            const auto h = random_word(gens, 25, 2 * t + 1);
            EXPECT_EQ(char_poly(compose(compose(h, g), inverse(h))), char_poly(g));
        }
    }
}

TEST(CharPoly, JsonIsConstantTermFirst) {
    const auto j = char_poly(MatrixElement::from_rows({{2, 1}, {1, 1}})).to_json();
    EXPECT_EQ(j, nlohmann::json({"1", "-3", "1"}));
}

TEST(Inverse, ComposesToIdentity) {
    const auto gens = validate_generators(elementary_generators(3));
    for (std::uint64_t t = 0; t < 30; ++t) {
        const auto g = random_word(gens, 40, t);
        EXPECT_TRUE(compose(g, inverse(g)).is_identity());
        EXPECT_TRUE(compose(inverse(g), g).is_identity());
    }
}

TEST(ValidateGenerators, AcceptsST) {
    const auto gens = validate_generators(sl2_st_generators());
    EXPECT_EQ(gens.size(), 5U);
    EXPECT_TRUE(gens.identity().is_identity());
}

TEST(ValidateGenerators, RejectsMissingInverse) {
    EXPECT_THROW(validate_generators(std::vector<MatrixElement>{MatrixElement::identity(2), sl2_t()}), NotSymmetric);
}

TEST(ValidateGenerators, RejectsMissingIdentity) {
    EXPECT_THROW(validate_generators(std::vector<MatrixElement>{sl2_s(), inverse(sl2_s())}), MissingIdentity);
}

TEST(ValidateGenerators, RejectsUnequalMultiplicities) {
    std::vector<MatrixElement> raw = sl2_st_generators();
    raw.push_back(sl2_t());
    EXPECT_THROW(validate_generators(raw), NotSymmetric);
    raw.push_back(inverse(sl2_t()));
    EXPECT_NO_THROW(validate_generators(raw));
}

TEST(ValidateGenerators, AbelianLattice) {
    const auto gens = validate_generators(lattice_generators(2));
    EXPECT_EQ(gens.size(), 5U);
    EXPECT_THROW(validate_generators(std::vector<AbelianElement>{AbelianElement{0}, AbelianElement{1}}), NotSymmetric);
}

// Property: every walk element has determinant exactly 1, checked by GMP cofactor expansion.
TEST(MatrixProperty, DeterminantOneAlongWalks) {
    for (auto n : {2U, 3U}) {
        const auto gens = validate_generators(n == 2 ? sl2_st_generators() : elementary_generators(3));
        for (std::uint64_t t = 0; t < 100; ++t) {
            const auto g = random_word(gens, 80, t, 5);
            EXPECT_EQ(cofactor_det(to_gmp(g), n), 1);
        }
    }
}

// Recomputes a long trajectory with an independent GMP matrix product driven by the same draws.
TEST(MatrixProperty, TrajectoryMatchesIndependentArithmetic) {
    const auto gens = validate_generators(elementary_generators(3));
    const std::uint64_t n = 400;
    WalkConfig<MatrixElement> cfg{gens, n, 1, 2024};
    const auto path = run_walk(cfg, 0);
    const CounterRng rng(2024);
    std::vector<mpz_class> state{1, 0, 0, 0, 1, 0, 0, 0, 1};
    std::size_t max_bits = 0;
    for (std::uint64_t t = 0; t < n; ++t) {
        const auto a = to_gmp(gens.expanded()[rng.uniform(0, t, gens.size())]);
        std::vector<mpz_class> next(9, 0);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                for (int k = 0; k < 3; ++k) next[i * 3 + j] += state[i * 3 + k] * a[k * 3 + j];
            }
        }
        state = next;
        const auto here = to_gmp(path[t + 1]);
        ASSERT_EQ(here, state) << "step " << t + 1;
        for (const auto& x : state) max_bits = std::max(max_bits, mpz_sizeinbase(x.get_mpz_t(), 2));
    }
    // entries of an n-step product of elementary matrices stay below 2^n * 3^n in size
    EXPECT_LE(max_bits, n * 3);
}
