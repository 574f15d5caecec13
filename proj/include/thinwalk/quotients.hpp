#pragma once

// Congruence quotients: SL_n(F_p), direct products SL_n(F_p) x SL_n(F_q), and
// (Z/m_1 x ... x Z/m_r) for the exponent lattices. Elements are packed into
// 64-bit codes so closures and Cayley tables stay compact.

#include <nlohmann/json.hpp>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"
#include "matgroup.hpp"
#include "modular.hpp"
#include "rng.hpp"

namespace thinwalk {

inline constexpr std::size_t kDefaultEnumerationBudget = 10'000'000;

struct CompositeModulus : DomainError {
    explicit CompositeModulus(const std::string& what) : DomainError(what) {}
};

/// |SL_n(F_p)| = p^{n(n-1)/2} * prod_{k=2}^{n} (p^k - 1).
inline BigInt group_order(unsigned n, u64 p) {
    if (n < 2) throw ConfigError("group_order needs n >= 2");
    if (!is_prime(p)) throw CompositeModulus(std::to_string(p) + " is not prime");
    BigInt q = p;
    BigInt order = ipow(q, n * (n - 1) / 2);
    for (unsigned k = 2; k <= n; ++k) order *= ipow(q, k) - 1;
    return order;
}

template <class G>
concept FiniteGroup = requires(const G& g, const typename G::element_type& x, std::uint64_t code) {
    { g.identity() } -> std::convertible_to<typename G::element_type>;
    { g.multiply(x, x) } -> std::convertible_to<typename G::element_type>;
    { g.encode(x) } -> std::convertible_to<std::uint64_t>;
    { g.decode(code) } -> std::convertible_to<typename G::element_type>;
    { g.order() } -> std::convertible_to<BigInt>;
    { g.label() } -> std::convertible_to<std::string>;
    { g.code_space() } -> std::convertible_to<long double>;
};

/// SL_n(F_p).
class SlModPrime {
public:
    using element_type = ModMatrix;
    using source_type = MatrixElement;

    SlModPrime(unsigned n, u64 p) : n_(n), p_(p) {
        if (n < 1) throw ConfigError("dimension must be positive");
        if (!is_prime(p)) throw CompositeModulus(std::to_string(p) + " is not prime");
        if (p > (1ULL << 31)) throw ConfigError("prime too large for the packed representation");
    }

    unsigned dimension() const noexcept { return n_; }
    u64 prime() const noexcept { return p_; }
    std::string label() const { return std::to_string(p_); }
    BigInt order() const { return n_ == 1 ? BigInt(1) : group_order(n_, p_); }
    long double code_space() const { return std::pow(static_cast<long double>(p_), static_cast<long double>(n_ * n_)); }

    ModMatrix identity() const { return ModMatrix::identity(n_); }
    ModMatrix multiply(const ModMatrix& a, const ModMatrix& b) const { return mod_multiply(a, b, p_); }
    ModMatrix reduce(const MatrixElement& g) const {
        if (g.dimension() != n_) throw ConfigError("dimension mismatch in reduce");
        return reduce_mod(g, p_);
    }

    u64 encode(const ModMatrix& m) const {
        if (code_space() >= 1.8e19L) throw BudgetExceeded("element code does not fit in 64 bits");
        u64 code = 0;
        for (std::size_t i = m.e.size(); i-- > 0;) code = code * p_ + m.e[i];
        return code;
    }
    ModMatrix decode(u64 code) const {
        ModMatrix m{n_, std::vector<u32>(static_cast<std::size_t>(n_) * n_, 0)};
        for (auto& v : m.e) {
            v = static_cast<u32>(code % p_);
            code /= p_;
        }
        return m;
    }

    bool contains(const ModMatrix& m) const { return m.n == n_ && mod_determinant(m, p_) == 1 % p_; }

    /// Visits every element exactly once. Rows 2..n range freely; the first row is then
    /// constrained by the linear equation det = sum_j r_1j * C_j = 1 in the cofactors C_j.
    template <class F>
    void for_each(F&& visit) const {
        const u32 n = n_;
        const u64 p = p_;
        if (n == 1) {
            visit(identity());
            return;
        }
        ModMatrix m{n, std::vector<u32>(static_cast<std::size_t>(n) * n, 0)};
        const std::size_t lower = static_cast<std::size_t>(n) * (n - 1);
        std::vector<u64> cof(n);
        ModMatrix minor{n - 1, std::vector<u32>(static_cast<std::size_t>(n - 1) * (n - 1), 0)};
        while (true) {
            for (u32 j = 0; j < n; ++j) {
                for (u32 r = 1; r < n; ++r) {
                    u32 cc = 0;
                    for (u32 c = 0; c < n; ++c) {
                        if (c == j) continue;
                        minor.at(r - 1, cc++) = m.at(r, c);
                    }
                }
                const u64 d = mod_determinant(minor, p);
                cof[j] = (j % 2 == 0) ? d : (p - d) % p;
            }
            u32 pivot = 0;
            while (pivot < n && cof[pivot] == 0) ++pivot;
            if (pivot < n) {
                const u64 pivot_inv = inv_mod(cof[pivot], p);
                std::vector<u32> free(n - 1, 0);
                while (true) {
                    u64 acc = 0;
                    u32 f = 0;
                    for (u32 j = 0; j < n; ++j) {
                        if (j == pivot) continue;
                        m.at(0, j) = free[f++];
                        acc = (acc + mulmod(m.at(0, j), cof[j], p)) % p;
                    }
                    m.at(0, pivot) = static_cast<u32>(mulmod((1 + p - acc) % p, pivot_inv, p));
                    visit(static_cast<const ModMatrix&>(m));
                    std::size_t k = 0;
                    while (k < free.size() && ++free[k] == p) free[k++] = 0;
                    if (k == free.size()) break;
                }
            }
            // odometer over the lower n-1 rows
            std::size_t k = 0;
            while (k < lower && ++m.e[n + k] == p) m.e[n + k++] = 0;
            if (k == lower) break;
        }
    }

    /// Uniform element: a uniform invertible matrix with its first row scaled by det^{-1}.
    ModMatrix sample(const CounterRng& rng, u64 index) const {
        const u64 cells = static_cast<u64>(n_) * n_;
        for (u64 attempt = 0;; ++attempt) {
            ModMatrix m{n_, std::vector<u32>(cells, 0)};
            for (u64 c = 0; c < cells; ++c) m.e[c] = static_cast<u32>(rng.uniform(index, attempt * cells + c, p_));
            const u64 det = mod_determinant(m, p_);
            if (det == 0) continue;
            const u64 inv = inv_mod(det, p_);
            for (u32 j = 0; j < n_; ++j) m.at(0, j) = static_cast<u32>(mulmod(m.at(0, j), inv, p_));
            return m;
        }
    }

private:
    unsigned n_;
    u64 p_;
};

/// SL_n(F_p) x SL_n(F_q) with component-wise operations.
class SlModPair {
public:
    using element_type = std::pair<ModMatrix, ModMatrix>;
    using source_type = MatrixElement;

    SlModPair(unsigned n, u64 p, u64 q) : first_(n, p), second_(n, q) {
        if (p == q) throw ConfigError("pair quotient needs distinct primes");
    }

    const SlModPrime& first() const noexcept { return first_; }
    const SlModPrime& second() const noexcept { return second_; }
    unsigned dimension() const noexcept { return first_.dimension(); }
    std::string label() const { return first_.label() + "x" + second_.label(); }
    BigInt order() const { return first_.order() * second_.order(); }
    long double code_space() const { return first_.code_space() * second_.code_space(); }

    element_type identity() const { return {first_.identity(), second_.identity()}; }
    element_type multiply(const element_type& a, const element_type& b) const {
        return {first_.multiply(a.first, b.first), second_.multiply(a.second, b.second)};
    }
    element_type reduce(const MatrixElement& g) const { return {first_.reduce(g), second_.reduce(g)}; }

    u64 encode(const element_type& x) const {
        if (code_space() >= 1.8e19L) throw BudgetExceeded("pair code does not fit in 64 bits");
        const auto radix = static_cast<u64>(second_.code_space());
        return first_.encode(x.first) * radix + second_.encode(x.second);
    }
    element_type decode(u64 code) const {
        const auto radix = static_cast<u64>(second_.code_space());
        return {first_.decode(code / radix), second_.decode(code % radix)};
    }

    template <class F>
    void for_each(F&& visit) const {
        std::vector<ModMatrix> right;
        second_.for_each([&](const ModMatrix& b) { right.push_back(b); });
        first_.for_each([&](const ModMatrix& a) {
            for (const auto& b : right) visit(element_type{a, b});
        });
    }

private:
    SlModPrime first_, second_;
};

/// Z/m_1 x ... x Z/m_r: reduction of the exponent lattice Z^r.
class CyclicProduct {
public:
    using element_type = std::vector<u64>;
    using source_type = AbelianElement;

    explicit CyclicProduct(std::vector<u64> moduli) : moduli_(std::move(moduli)) {
        if (moduli_.empty()) throw ConfigError("cyclic product needs at least one factor");
        for (u64 m : moduli_) {
            if (m < 1) throw ConfigError("cyclic modulus must be positive");
        }
    }

    const std::vector<u64>& moduli() const noexcept { return moduli_; }
    std::string label() const {
        std::string s;
        for (std::size_t i = 0; i < moduli_.size(); ++i) s += (i ? "x" : "") + std::string("Z/") + std::to_string(moduli_[i]);
        return s;
    }
    BigInt order() const {
        BigInt o = 1;
        for (u64 m : moduli_) o *= m;
        return o;
    }
    long double code_space() const {
        long double s = 1;
        for (u64 m : moduli_) s *= static_cast<long double>(m);
        return s;
    }

    element_type identity() const { return element_type(moduli_.size(), 0); }
    element_type multiply(const element_type& a, const element_type& b) const {
        element_type c(moduli_.size());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = (a[i] + b[i]) % moduli_[i];
        return c;
    }
    element_type reduce(const AbelianElement& g) const {
        if (g.rank() != moduli_.size()) throw ConfigError("rank mismatch in reduce");
        element_type c(moduli_.size());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = mod_u64(g[i], moduli_[i]);
        return c;
    }
    u64 encode(const element_type& x) const {
        u64 code = 0;
        for (std::size_t i = x.size(); i-- > 0;) code = code * moduli_[i] + x[i];
        return code;
    }
    element_type decode(u64 code) const {
        element_type x(moduli_.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = code % moduli_[i];
            code /= moduli_[i];
        }
        return x;
    }

    template <class F>
    void for_each(F&& visit) const {
        const u64 total = static_cast<u64>(code_space());
        for (u64 c = 0; c < total; ++c) visit(static_cast<const element_type&>(decode(c)));
    }

    element_type sample(const CounterRng& rng, u64 index) const {
        element_type x(moduli_.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(index, i, moduli_[i]);
        return x;
    }

private:
    std::vector<u64> moduli_;
};

/// Codes of reached elements; a dense bitmap when the code space is small, a hash set otherwise.
class CodeSet {
public:
    explicit CodeSet(long double space) {
        if (space <= static_cast<long double>(1ULL << 31)) bits_.assign(static_cast<std::size_t>(space) / 64 + 1, 0);
    }
    /// True when the code was newly inserted.
    bool insert(u64 code) {
        if (!bits_.empty()) {
            u64& word = bits_[code >> 6];
            const u64 mask = 1ULL << (code & 63);
            if (word & mask) return false;
            word |= mask;
            return true;
        }
        return hashed_.insert(code).second;
    }

private:
    std::vector<u64> bits_;
    std::unordered_set<u64> hashed_;
};

struct ClosureResult {
    std::string modulus;
    std::size_t reached = 0;
    BigInt order = 0;
    bool surjective = false;

    nlohmann::json to_json() const {
        return {{"modulus", modulus}, {"order", order.str()}, {"closure_size", reached}, {"surjective", surjective}};
    }
};

/// Breadth-first closure of the identity under right multiplication by the generators.
template <FiniteGroup G>
ClosureResult bfs_closure(const G& group, const std::vector<typename G::element_type>& gens,
                          std::size_t budget = kDefaultEnumerationBudget) {
    if (budget < 1) throw ConfigError("enumeration budget must be at least 1");
    CodeSet seen(group.code_space());
    std::vector<u64> frontier{group.encode(group.identity())};
    seen.insert(frontier.front());
    std::size_t reached = 1;
    std::vector<typename G::element_type> gen_elems = gens;
    while (!frontier.empty()) {
        std::vector<u64> next;
        for (u64 code : frontier) {
            const auto x = group.decode(code);
            for (const auto& a : gen_elems) {
                const u64 y = group.encode(group.multiply(x, a));
                if (seen.insert(y)) {
                    if (++reached > budget) {
                        throw BudgetExceeded("closure mod " + group.label() + " exceeds " + std::to_string(budget) +
                                             " elements");
                    }
                    next.push_back(y);
                }
            }
        }
        frontier.swap(next);
    }
    ClosureResult r;
    r.modulus = group.label();
    r.reached = reached;
    r.order = group.order();
    r.surjective = BigInt(reached) == r.order;
    return r;
}

/// Reduction of every element of a generator multiset, merging coincident residues.
template <FiniteGroup G>
struct ReducedGenerators {
    std::vector<typename G::element_type> elements;
    std::vector<unsigned> weights;
    unsigned total = 0;
};

template <FiniteGroup G>
ReducedGenerators<G> reduce_generators(const G& group, const GeneratorMultiset<typename G::source_type>& gens) {
    ReducedGenerators<G> out;
    std::unordered_map<u64, std::size_t> index;
    for (std::size_t i = 0; i < gens.distinct().size(); ++i) {
        auto x = group.reduce(gens.distinct()[i]);
        const u64 code = group.encode(x);
        auto [it, fresh] = index.emplace(code, out.elements.size());
        if (fresh) {
            out.elements.push_back(std::move(x));
            out.weights.push_back(gens.multiplicities()[i]);
        } else {
            out.weights[it->second] += gens.multiplicities()[i];
        }
        out.total += gens.multiplicities()[i];
    }
    return out;
}

/// Finite Cayley graph of the image of Gamma: element codes and the right-multiplication table.
struct CayleyTable {
    std::string label;
    std::vector<u64> codes;            // codes[0] is the identity
    std::vector<u32> next;             // next[i * gens + a]
    std::vector<unsigned> weights;     // multiplicity of each distinct reduced generator
    unsigned a_size = 0;               // sum of weights, |A|

    std::size_t order() const noexcept { return codes.size(); }
    std::size_t generator_count() const noexcept { return weights.size(); }
    u32 step(std::size_t i, std::size_t a) const { return next[i * weights.size() + a]; }
};

template <FiniteGroup G>
CayleyTable build_cayley_table(const G& group, const std::vector<typename G::element_type>& gens,
                               const std::vector<unsigned>& weights, std::size_t budget = kDefaultEnumerationBudget) {
    if (gens.size() != weights.size() || gens.empty()) throw ConfigError("generator/weight mismatch");
    CayleyTable t;
    t.label = group.label();
    t.weights = weights;
    for (unsigned w : weights) t.a_size += w;
    std::unordered_map<u64, u32> index;
    const u64 id = group.encode(group.identity());
    index.emplace(id, 0);
    t.codes.push_back(id);
    for (std::size_t i = 0; i < t.codes.size(); ++i) {
        const auto x = group.decode(t.codes[i]);
        for (const auto& a : gens) {
            const u64 y = group.encode(group.multiply(x, a));
            auto [it, fresh] = index.emplace(y, static_cast<u32>(t.codes.size()));
            if (fresh) {
                if (t.codes.size() >= budget) {
                    throw BudgetExceeded("Cayley table mod " + group.label() + " exceeds " + std::to_string(budget));
                }
                t.codes.push_back(y);
            }
            t.next.push_back(it->second);
        }
    }
    return t;
}

template <FiniteGroup G>
CayleyTable build_cayley_table(const G& group, const GeneratorMultiset<typename G::source_type>& gens,
                               std::size_t budget = kDefaultEnumerationBudget) {
    const auto reduced = reduce_generators(group, gens);
    return build_cayley_table(group, reduced.elements, reduced.weights, budget);
}

/// Path counts of the walk on a finite Cayley graph after n steps (denominator |A|^n).
inline std::vector<BigInt> finite_walk_counts(const CayleyTable& t, std::uint64_t n) {
    std::vector<BigInt> cur(t.order(), BigInt(0));
    cur[0] = 1;
    for (std::uint64_t s = 0; s < n; ++s) {
        std::vector<BigInt> nxt(t.order(), BigInt(0));
        for (std::size_t i = 0; i < t.order(); ++i) {
            if (cur[i] == 0) continue;
            for (std::size_t a = 0; a < t.generator_count(); ++a) nxt[t.step(i, a)] += cur[i] * t.weights[a];
        }
        cur.swap(nxt);
    }
    return cur;
}

/// A finite quotient with an optional full element list.
template <FiniteGroup G>
struct FiniteQuotient {
    G group;
    std::vector<typename G::element_type> elements;  // empty unless enumerated

    bool enumerated() const noexcept { return !elements.empty(); }

    static FiniteQuotient make(G group, bool enumerate, std::size_t budget = kDefaultEnumerationBudget) {
        FiniteQuotient q{std::move(group), {}};
        if (enumerate) {
            if (q.group.order() > budget) {
                throw BudgetExceeded("quotient " + q.group.label() + " of order " + q.group.order().str() +
                                     " exceeds enumeration budget");
            }
            q.group.for_each([&](const typename G::element_type& x) { q.elements.push_back(x); });
        }
        return q;
    }
};

struct PrimeSchedule {
    std::vector<u64> primes;
    u64 min_norm = 2;
    double growth_constant = 100.0;
    std::vector<bool> growth_ok;  // p_i <= c * i^2, i counted from 1

    bool all_growth_ok() const {
        for (bool b : growth_ok) {
            if (!b) return false;
        }
        return true;
    }

    nlohmann::json to_json() const {
        return {{"primes", primes}, {"min_norm", min_norm}, {"growth_constant", growth_constant},
                {"growth_ok", all_growth_ok()}};
    }
};

/// First t primes >= min_norm, ascending, with the growth check flagged per entry.
inline PrimeSchedule prime_schedule(std::size_t t, u64 min_norm, double growth_constant = 100.0) {
    if (t < 1) throw ConfigError("prime schedule needs t >= 1");
    PrimeSchedule s;
    s.min_norm = min_norm;
    s.growth_constant = growth_constant;
    u64 p = next_prime_at_least(min_norm);
    for (std::size_t i = 1; i <= t; ++i) {
        s.primes.push_back(p);
        s.growth_ok.push_back(static_cast<double>(p) <= growth_constant * static_cast<double>(i) * static_cast<double>(i));
        p = next_prime_at_least(p + 1);
    }
    return s;
}

/// Primes of a candidate list at which the generators fail to surject onto SL_n(F_p).
inline std::vector<u64> non_surjective_primes(const GeneratorMultiset<MatrixElement>& gens,
                                              const std::vector<u64>& candidates,
                                              std::size_t budget = kDefaultEnumerationBudget) {
    std::vector<u64> bad;
    const auto n = static_cast<unsigned>(gens.identity().dimension());
    for (u64 p : candidates) {
        SlModPrime g(n, p);
        if (!bfs_closure(g, reduce_generators(g, gens).elements, budget).surjective) bad.push_back(p);
    }
    return bad;
}

}  // namespace thinwalk
