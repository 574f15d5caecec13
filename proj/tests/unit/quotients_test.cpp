#include <gtest/gtest.h>

#include <map>
#include <set>

#include "thinwalk/quotients.hpp"
#include "thinwalk/walker.hpp"

using namespace thinwalk;

namespace {

// Counts n x n matrices over F_p with determinant 1 by direct enumeration.
std::uint64_t brute_sl_count(unsigned n, std::uint64_t p) {
    const std::uint64_t cells = n * n;
    std::vector<std::uint64_t> m(cells, 0);
    std::uint64_t count = 0;
    auto det = [&]() -> std::int64_t {
        const auto P = static_cast<std::int64_t>(p);
        auto at = [&](unsigned i, unsigned j) { return static_cast<std::int64_t>(m[i * n + j]); };
        if (n == 2) return ((at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0)) % P + P) % P;
        std::int64_t d = at(0, 0) * ((at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) % P) -
                         at(0, 1) * ((at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) % P) +
                         at(0, 2) * ((at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0)) % P);
        return (d % P + P) % P;
    };
    while (true) {
        if (det() == 1 % static_cast<std::int64_t>(p)) ++count;
        std::size_t k = 0;
        while (k < cells && ++m[k] == p) m[k++] = 0;
        if (k == cells) break;
    }
    return count;
}

}  // namespace

TEST(GroupOrder, SpecExamples) {
    EXPECT_EQ(group_order(2, 2), 6);
    EXPECT_EQ(group_order(2, 3), 24);
    EXPECT_EQ(group_order(2, 5), 120);
    EXPECT_THROW(group_order(2, 4), CompositeModulus);
}

TEST(GroupOrder, MatchesBruteForceForSmallFields) {
    for (std::uint64_t p = 2; p < 100; ++p) {
        if (!is_prime(p)) continue;
        EXPECT_EQ(group_order(2, p), brute_sl_count(2, p)) << "p=" << p;
    }
    for (std::uint64_t p : {2, 3, 5, 7}) EXPECT_EQ(group_order(3, p), brute_sl_count(3, p)) << "p=" << p;
}

TEST(Reduce, Examples) {
    const SlModPrime q2(2, 2);
    const auto r = q2.reduce(MatrixElement::from_rows({{2, 1}, {1, 1}}));
    EXPECT_EQ(r.e, (std::vector<u32>{0, 1, 1, 1}));
    for (u64 p : {2, 3, 7, 31}) {
        const SlModPrime q(3, p);
        EXPECT_EQ(q.reduce(MatrixElement::identity(3)), q.identity());
    }
    const SlModPrime q5(2, 5);
    EXPECT_EQ(q5.reduce(MatrixElement::from_rows({{0, -1}, {1, 0}})).e, (std::vector<u32>{0, 4, 1, 0}));
}

TEST(Reduce, IsHomomorphism) {
    for (unsigned n : {2U, 3U}) {
        const auto gens = validate_generators(n == 2 ? sl2_st_generators() : elementary_generators(3));
        WalkConfig<MatrixElement> cfg{gens, 40, 2000, 77};
        for (u64 p : {2, 3, 7, 13}) {
            const SlModPrime q(n, p);
            for (std::uint64_t t = 0; t < 1000; t += 2) {
                const auto g = run_walk(cfg, t).back();
                const auto h = run_walk(cfg, t + 1).back();
                ASSERT_EQ(q.reduce(compose(g, h)), q.multiply(q.reduce(g), q.reduce(h)));
                ASSERT_TRUE(q.contains(q.reduce(g)));
            }
        }
    }
}

TEST(SlModPrime, EncodeDecodeAndEnumeration) {
    for (auto [n, p] : std::vector<std::pair<unsigned, u64>>{{2, 2}, {2, 3}, {2, 7}, {3, 2}, {3, 3}}) {
        const SlModPrime q(n, p);
        std::set<u64> codes;
        q.for_each([&](const ModMatrix& m) {
            ASSERT_TRUE(q.contains(m));
            ASSERT_EQ(q.decode(q.encode(m)), m);
            codes.insert(q.encode(m));
        });
        EXPECT_EQ(BigInt(codes.size()), q.order());
    }
}

TEST(SlModPrime, SamplingIsUniformOnSl2F3) {
    const SlModPrime q(2, 3);
    const CounterRng rng(5);
    std::map<u64, int> freq;
    const int m = 48000;
    for (int i = 0; i < m; ++i) {
        const auto x = q.sample(rng, static_cast<u64>(i));
        ASSERT_TRUE(q.contains(x));
        ++freq[q.encode(x)];
    }
    ASSERT_EQ(freq.size(), 24U);
    double chi2 = 0;
    for (auto& [c, f] : freq) chi2 += (f - 2000.0) * (f - 2000.0) / 2000.0;
    EXPECT_LT(chi2, 60.0);  // 23 degrees of freedom, far tail
}

TEST(BfsClosure, Examples) {
    const auto st = validate_generators(sl2_st_generators());
    const auto el = validate_generators(elementary_generators(2));
    const SlModPrime q3(2, 3);
    auto r = bfs_closure(q3, reduce_generators(q3, el).elements);
    EXPECT_EQ(r.reached, 24U);
    EXPECT_TRUE(r.surjective);
    r = bfs_closure(q3, {q3.identity()});
    EXPECT_EQ(r.reached, 1U);
    EXPECT_FALSE(r.surjective);
    const SlModPair pair(2, 3, 5);
    for (const auto* gens : {&st, &el}) {
        r = bfs_closure(pair, reduce_generators(pair, *gens).elements);
        EXPECT_EQ(r.reached, 2880U);
        EXPECT_TRUE(r.surjective);
        EXPECT_EQ(r.to_json()["modulus"], "3x5");
    }
    EXPECT_THROW(bfs_closure(pair, reduce_generators(pair, st).elements, 100), BudgetExceeded);
}

TEST(BfsClosure, SurjectiveForSmallPrimesAndPairs) {
    const auto st = validate_generators(sl2_st_generators());
    const auto el2 = validate_generators(elementary_generators(2));
    const auto el3 = validate_generators(elementary_generators(3));
    std::vector<u64> primes;
    for (u64 p = 3; p <= 31; ++p) {
        if (is_prime(p)) primes.push_back(p);
    }
    EXPECT_TRUE(non_surjective_primes(st, primes).empty());
    EXPECT_TRUE(non_surjective_primes(el2, primes).empty());
    EXPECT_TRUE(non_surjective_primes(el3, {3, 5}).empty());
    const std::size_t budget = 300'000;
    int pairs = 0;
    for (std::size_t i = 0; i < primes.size(); ++i) {
        for (std::size_t j = i + 1; j < primes.size(); ++j) {
            if (group_order(2, primes[i]) * group_order(2, primes[j]) > budget) continue;
            const SlModPair q(2, primes[i], primes[j]);
            EXPECT_TRUE(bfs_closure(q, reduce_generators(q, st).elements, budget).surjective) << q.label();
            ++pairs;
        }
    }
    EXPECT_GE(pairs, 10);
}

TEST(CyclicProduct, ClosureAndReduction) {
    const CyclicProduct z2z2({2, 2});
    EXPECT_EQ(z2z2.order(), 4);
    EXPECT_EQ(z2z2.label(), "Z/2xZ/2");
    const auto gens = validate_generators(lattice_generators(2));
    const auto r = bfs_closure(z2z2, reduce_generators(z2z2, gens).elements);
    EXPECT_TRUE(r.surjective);
    EXPECT_EQ(z2z2.reduce(AbelianElement{-3, 4}), (std::vector<u64>{1, 0}));
}

TEST(CayleyTable, WeightsMergeCoincidentResidues) {
    const auto gens = validate_generators(sl2_st_generators());
    const SlModPrime q2(2, 2);  // S = S^{-1} and T = T^{-1} mod 2
    const auto red = reduce_generators(q2, gens);
    EXPECT_EQ(red.total, 5U);
    EXPECT_EQ(red.elements.size(), 3U);
    const auto t = build_cayley_table(q2, gens);
    EXPECT_EQ(t.order(), 6U);
    EXPECT_EQ(t.a_size, 5U);
    const auto counts = finite_walk_counts(t, 3);
    BigInt total = 0;
    for (const auto& c : counts) total += c;
    EXPECT_EQ(total, 125);
}

TEST(PrimeSchedule, Examples) {
    EXPECT_EQ(prime_schedule(3, 5).primes, (std::vector<u64>{5, 7, 11}));
    EXPECT_EQ(prime_schedule(1, 2).primes, (std::vector<u64>{2}));
    const auto s = prime_schedule(25, 3);
    EXPECT_EQ(s.primes.size(), 25U);
    EXPECT_EQ(s.primes.back(), 101U);
    EXPECT_TRUE(s.all_growth_ok());
    for (std::size_t i = 0; i < s.primes.size(); ++i) EXPECT_LE(s.primes[i], 100 * (i + 1) * (i + 1));
    EXPECT_FALSE(prime_schedule(2, 1000, 1.0).all_growth_ok());
    EXPECT_THROW(prime_schedule(0, 2), ConfigError);
}

TEST(FiniteQuotient, EnumerationRespectsBudget) {
    const auto q = FiniteQuotient<SlModPrime>::make(SlModPrime(2, 5), true);
    EXPECT_EQ(q.elements.size(), 120U);
    EXPECT_THROW(FiniteQuotient<SlModPrime>::make(SlModPrime(2, 5), true, 100), BudgetExceeded);
    EXPECT_FALSE(FiniteQuotient<SlModPrime>::make(SlModPrime(3, 7), false).enumerated());
}
