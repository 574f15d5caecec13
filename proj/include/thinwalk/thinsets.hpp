#pragma once

// Membership oracles for concrete thin sets in SL_n(Z) and Z^r, each paired
// with a residual test on finite quotients that contains the reduction of the set.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bitset>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"
#include "matgroup.hpp"
#include "modular.hpp"
#include "quotients.hpp"
#include "rng.hpp"
#include "verdict.hpp"

namespace thinwalk {

enum class ThinSetKind {
    ReducibleCharpoly,
    NongenericGalois,
    RationalFixedFlag,
    ProperPower,
    Subvariety,
    TorusSquares,
};

inline const char* to_string(ThinSetKind k) {
    switch (k) {
        case ThinSetKind::ReducibleCharpoly: return "REDUCIBLE_CHARPOLY";
        case ThinSetKind::NongenericGalois: return "NONGENERIC_GALOIS";
        case ThinSetKind::RationalFixedFlag: return "RATIONAL_FIXED_FLAG";
        case ThinSetKind::ProperPower: return "PROPER_POWER";
        case ThinSetKind::Subvariety: return "SUBVARIETY";
        case ThinSetKind::TorusSquares: return "TORUS_SQUARES";
    }
    return "?";
}

inline ThinSetKind parse_thin_set_kind(const std::string& s) {
    for (auto k : {ThinSetKind::ReducibleCharpoly, ThinSetKind::NongenericGalois, ThinSetKind::RationalFixedFlag,
                   ThinSetKind::ProperPower, ThinSetKind::Subvariety, ThinSetKind::TorusSquares}) {
        if (s == to_string(k)) return k;
    }
    throw ConfigError("unknown thin set kind '" + s + "'");
}

/// Integer polynomial in the coordinates of an element (matrix entries row-major, or exponents).
struct MultiPoly {
    struct Term {
        BigInt coef;
        std::vector<unsigned> exps;
    };

    std::size_t arity = 0;
    std::vector<Term> terms;  // empty terms list is the zero polynomial

    static MultiPoly constant(std::size_t arity, long long c) {
        MultiPoly p{arity, {}};
        if (c != 0) p.terms.push_back({BigInt(c), std::vector<unsigned>(arity, 0)});
        return p;
    }
    static MultiPoly coordinate(std::size_t arity, std::size_t i) {
        MultiPoly p{arity, {{BigInt(1), std::vector<unsigned>(arity, 0)}}};
        p.terms[0].exps.at(i) = 1;
        return p;
    }
    /// trace(g) - c on n x n matrices.
    static MultiPoly trace_minus(std::size_t n, long long c) {
        MultiPoly p = constant(n * n, -c);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<unsigned> e(n * n, 0);
            e[i * n + i] = 1;
            p.terms.push_back({BigInt(1), e});
        }
        return p;
    }
    /// trace(g)^2 - 4 on 2 x 2 matrices: vanishes exactly when trace = +-2.
    static MultiPoly sl2_parabolic() {
        MultiPoly p = constant(4, -4);
        p.terms.push_back({BigInt(1), {2, 0, 0, 0}});
        p.terms.push_back({BigInt(2), {1, 0, 0, 1}});
        p.terms.push_back({BigInt(1), {0, 0, 0, 2}});
        return p;
    }

    BigInt evaluate(std::span<const BigInt> x) const {
        if (x.size() != arity) throw ConfigError("ArityMismatch: polynomial arity " + std::to_string(arity) +
                                                 " applied to " + std::to_string(x.size()) + " coordinates");
        BigInt acc = 0;
        for (const auto& t : terms) {
            BigInt m = t.coef;
            for (std::size_t i = 0; i < arity; ++i) {
                if (t.exps[i]) m *= ipow(x[i], t.exps[i]);
            }
            acc += m;
        }
        return acc;
    }

    template <class U>
    u64 evaluate_mod(std::span<const U> x, u64 p) const {
        if (x.size() != arity) throw ConfigError("ArityMismatch in residual evaluation");
        u64 acc = 0;
        for (const auto& t : terms) {
            u64 m = mod_u64(t.coef, p);
            for (std::size_t i = 0; i < arity; ++i) {
                if (t.exps[i]) m = mulmod(m, powmod(static_cast<u64>(x[i]) % p, t.exps[i], p), p);
            }
            acc = (acc + m) % p;
        }
        return acc;
    }

    nlohmann::json to_json() const {
        nlohmann::json ts = nlohmann::json::array();
        for (const auto& t : terms) ts.push_back({{"coef", t.coef.str()}, {"exp", t.exps}});
        return {{"arity", arity}, {"terms", ts}};
    }

    static MultiPoly from_json(const nlohmann::json& j) {
        MultiPoly p;
        p.arity = j.at("arity").get<std::size_t>();
        for (const auto& t : j.at("terms")) {
            Term term;
            const auto& c = t.at("coef");
            term.coef = c.is_string() ? parse_bigint(c.get<std::string>()) : BigInt(c.get<long long>());
            term.exps = t.at("exp").get<std::vector<unsigned>>();
            if (term.exps.size() != p.arity) throw ConfigError("ArityMismatch: term exponent vector length");
            p.terms.push_back(std::move(term));
        }
        return p;
    }
};

enum class FlagType { Line, Full };

/// Parameters of one thin set. Which fields matter depends on the kind.
struct ThinSetSpec {
    ThinSetKind kind = ThinSetKind::Subvariety;
    unsigned power = 2;                 // PROPER_POWER
    unsigned search_depth = 2;          // PROPER_POWER root search radius
    std::vector<MultiPoly> polys;       // SUBVARIETY
    FlagType flag = FlagType::Line;     // RATIONAL_FIXED_FLAG
    std::string galois_component = "all";  // NONGENERIC_GALOIS: all | reducible | alternating
    std::vector<u64> primes;            // certificate primes (Frobenius sampling, power residues)
    int complexity = 1;                 // declared complexity, metadata only

    nlohmann::json to_json() const {
        nlohmann::json j{{"kind", to_string(kind)}, {"complexity", complexity}};
        if (kind == ThinSetKind::ProperPower) {
            j["power"] = power;
            j["search_depth"] = search_depth;
        }
        if (kind == ThinSetKind::Subvariety) {
            nlohmann::json ps = nlohmann::json::array();
            for (const auto& p : polys) ps.push_back(p.to_json());
            j["polys"] = ps;
        }
        if (kind == ThinSetKind::RationalFixedFlag) j["flag"] = flag == FlagType::Line ? "line" : "full";
        if (kind == ThinSetKind::NongenericGalois) j["component"] = galois_component;
        if (!primes.empty()) j["primes"] = primes;
        return j;
    }

    static ThinSetSpec from_json(const nlohmann::json& j) {
        ThinSetSpec s;
        s.kind = parse_thin_set_kind(j.at("kind").get<std::string>());
        s.complexity = j.value("complexity", 1);
        s.power = j.value("power", 2U);
        s.search_depth = j.value("search_depth", 2U);
        if (s.kind == ThinSetKind::ProperPower && s.power < 2) throw ConfigError("PROPER_POWER needs k >= 2");
        if (j.contains("polys")) {
            for (const auto& p : j.at("polys")) s.polys.push_back(MultiPoly::from_json(p));
        }
        if (s.kind == ThinSetKind::Subvariety && s.polys.empty()) throw ConfigError("SUBVARIETY needs polynomials");
        const std::string flag = j.value("flag", std::string("line"));
        if (flag != "line" && flag != "full") throw ConfigError("flag must be line or full");
        s.flag = flag == "line" ? FlagType::Line : FlagType::Full;
        s.galois_component = j.value("component", std::string("all"));
        if (s.galois_component != "all" && s.galois_component != "reducible" && s.galois_component != "alternating") {
            throw ConfigError("galois component must be all, reducible or alternating");
        }
        if (j.contains("primes")) s.primes = j.at("primes").get<std::vector<u64>>();
        return s;
    }
};

// ---------------------------------------------------------------------------
// Polynomial facts over Q.

/// Integer roots of a monic polynomial whose constant term is +-1 (always the case for det-1 matrices).
inline std::vector<BigInt> unit_roots(const IntPolynomial& f) {
    std::vector<BigInt> roots;
    for (long long r : {1LL, -1LL}) {
        if (f.evaluate(BigInt(r)) == 0) roots.emplace_back(r);
    }
    return roots;
}

/// Integer roots of a monic integer polynomial; candidates are the divisors of the constant term.
inline std::vector<BigInt> integer_roots(const IntPolynomial& f) {
    const BigInt a0 = boost::multiprecision::abs(f[0]);
    if (a0 == 0) {
        std::vector<BigInt> r{BigInt(0)};
        return r;
    }
    if (a0 == 1) return unit_roots(f);
    if (a0 > BigInt(1) << 62) throw DomainError("constant term too large for divisor enumeration");
    std::vector<BigInt> roots;
    const auto v = a0.convert_to<u64>();
    for (u64 d = 1; d * d <= v; ++d) {
        if (v % d) continue;
        for (u64 c : {d, v / d}) {
            for (int s : {1, -1}) {
                BigInt r = BigInt(c) * s;
                if (f.evaluate(r) == 0 && std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
            }
        }
    }
    return roots;
}

/// Discriminant of a monic cubic X^3 + bX^2 + cX + d.
inline BigInt cubic_discriminant(const IntPolynomial& f) {
    if (f.degree() != 3) throw DomainError("cubic discriminant needs degree 3");
    const BigInt& d = f[0];
    const BigInt& c = f[1];
    const BigInt& b = f[2];
    return b * b * c * c - 4 * c * c * c - 4 * b * b * b * d - 27 * d * d + 18 * b * c * d;
}

inline BigInt quadratic_discriminant(const IntPolynomial& f) {
    if (f.degree() != 2) throw DomainError("quadratic discriminant needs degree 2");
    return f[1] * f[1] - 4 * f[0];
}

struct QuadraticPair {
    std::array<BigInt, 3> first;   // c, b, 1 for X^2 + bX + c
    std::array<BigInt, 3> second;
};

/// Splits a monic quartic into two monic integer quadratics when possible.
/// With (X^2 + bX + c)(X^2 + dX + e), c runs over divisors of a0 and b is then
/// determined linearly (c != e) or by an integer quadratic (c == e).
inline std::optional<QuadraticPair> quartic_quadratic_split(const IntPolynomial& f) {
    if (f.degree() != 4) throw DomainError("quartic split needs degree 4");
    const BigInt &a0 = f[0], &a1 = f[1], &a2 = f[2], &a3 = f[3];
    std::vector<BigInt> divisors;
    const BigInt mag = boost::multiprecision::abs(a0);
    if (mag == 0) return std::nullopt;  // X is a linear factor; found by the root search
    if (mag > BigInt(1) << 62) throw DomainError("constant term too large for divisor enumeration");
    const auto v = mag.convert_to<u64>();
    for (u64 d = 1; d * d <= v; ++d) {
        if (v % d) continue;
        for (u64 c : {d, v / d}) {
            divisors.emplace_back(c);
            divisors.emplace_back(-BigInt(c));
        }
    }
    for (const BigInt& c : divisors) {
        const BigInt e = a0 / c;
        if (c != e) {
            const BigInt num = a1 - c * a3;
            const BigInt den = e - c;
            if (num % den != 0) continue;
            const BigInt b = num / den;
            const BigInt d = a3 - b;
            if (c + e + b * d == a2) return QuadraticPair{{c, b, 1}, {e, d, 1}};
        } else {
            if (a1 != c * a3) continue;
            const BigInt disc = a3 * a3 - 4 * (a2 - 2 * c);
            auto s = exact_sqrt(disc);
            if (!s) continue;
            const BigInt b = (a3 + *s) / 2;
            const BigInt d = a3 - b;
            if (b + d == a3 && b * d == a2 - 2 * c) return QuadraticPair{{c, b, 1}, {e, d, 1}};
        }
    }
    return std::nullopt;
}

/// Frobenius cycle types of f at squarefree primes of the list.
struct FrobeniusSample {
    u64 prime;
    std::vector<int> cycle_type;
};

inline std::vector<FrobeniusSample> frobenius_samples(const IntPolynomial& f, const std::vector<u64>& primes) {
    std::vector<FrobeniusSample> out;
    for (u64 p : primes) {
        const PolyModP fp = PolyModP::from_int(f, p);
        if (!is_squarefree(fp)) continue;  // inseparable residue: ramified, skip
        out.push_back({p, factor_degrees(fp)});
    }
    return out;
}

inline std::vector<u64> default_frobenius_primes() {
    std::vector<u64> ps;
    for (u64 p = 2; ps.size() < 60; ++p) {
        if (is_prime(p)) ps.push_back(p);
    }
    return ps;
}

/// Degrees d in [1, n-1] compatible with every sampled factorization pattern.
/// Empty means f is irreducible over Q.
inline std::vector<int> compatible_factor_degrees(int n, const std::vector<FrobeniusSample>& samples) {
    std::vector<bool> ok(static_cast<std::size_t>(n) + 1, true);
    for (const auto& s : samples) {
        std::vector<bool> sums(static_cast<std::size_t>(n) + 1, false);
        sums[0] = true;
        for (int d : s.cycle_type) {
            for (int v = n; v >= d; --v) sums[v] = sums[v] || sums[v - d];
        }
        for (int v = 0; v <= n; ++v) ok[v] = ok[v] && sums[v];
    }
    std::vector<int> degs;
    for (int v = 1; v < n; ++v) {
        if (ok[v]) degs.push_back(v);
    }
    return degs;
}

// ---------------------------------------------------------------------------
// Global oracles on SL_n(Z).

inline OracleVerdict reducible_charpoly(const MatrixElement& g, const std::vector<u64>& primes = {}) {
    const IntPolynomial chi = char_poly(g);
    const std::size_t n = chi.degree();
    if (n <= 1) return OracleVerdict::out("degree " + std::to_string(n) + " is irreducible");
    const auto roots = unit_roots(chi);
    if (!roots.empty()) return OracleVerdict::in("rational root " + roots.front().str() + " of " + chi.to_string());
    if (n <= 3) return OracleVerdict::out("no rational root among +-1 of " + chi.to_string());
    if (n == 4) {
        if (auto split = quartic_quadratic_split(chi)) {
            return OracleVerdict::in("factor X^2 + " + split->first[1].str() + "X + " + split->first[0].str());
        }
        return OracleVerdict::out("no linear or monic quadratic factor of " + chi.to_string());
    }
    const auto samples = frobenius_samples(chi, primes.empty() ? default_frobenius_primes() : primes);
    if (compatible_factor_degrees(static_cast<int>(n), samples).empty()) {
        return OracleVerdict::out("mod-p factorization patterns admit no proper factor degree");
    }
    return OracleVerdict::unknown("degree " + std::to_string(n) + " above 4 with no irreducibility certificate");
}

namespace detail {

inline bool is_small_prime(int v) {
    if (v < 2) return false;
    for (int d = 2; d * d <= v; ++d) {
        if (v % d == 0) return false;
    }
    return true;
}

inline bool is_odd_permutation(const std::vector<int>& type) {
    int even_cycles = 0;
    for (int len : type) even_cycles += (len % 2 == 0);
    return even_cycles % 2 == 1;
}

/// Some power of this element is a transposition: exactly one 2-cycle, other cycles odd.
inline bool powers_to_transposition(const std::vector<int>& type) {
    int twos = 0;
    for (int len : type) {
        if (len == 2) ++twos;
        else if (len % 2 == 0) return false;
    }
    return twos == 1;
}

/// Some power is an l-cycle for a prime l with n/2 < l < n-2.
inline bool powers_to_jordan_cycle(const std::vector<int>& type, int n) {
    for (int len : type) {
        if (!is_small_prime(len) || 2 * len <= n || len > n - 3) continue;
        // other cycles are shorter than len, hence coprime to it
        return true;
    }
    return false;
}

}  // namespace detail

/// IN means the Galois group of the characteristic polynomial is NOT the generic S_n.
inline OracleVerdict generic_galois(const MatrixElement& g, const std::string& expected = "S_n",
                                    const std::vector<u64>& primes = {}, const std::string& component = "all") {
    if (expected != "S_n") throw ConfigError("only the split generic group S_n is modeled");
    const IntPolynomial chi = char_poly(g);
    const std::size_t n = chi.degree();
    if (n <= 1) return OracleVerdict::out("degree 1: Galois group is S_1");
    const bool want_reducible = component != "alternating";
    const bool want_alternating = component != "reducible";
    if (n == 2) {
        const BigInt disc = quadratic_discriminant(chi);
        if (auto r = exact_sqrt(disc)) {
            return OracleVerdict::in("discriminant " + disc.str() + " = " + r->str() + "^2");
        }
        return OracleVerdict::out("discriminant " + disc.str() + " is not a square: Galois group C_2");
    }
    if (n == 3) {
        const auto roots = unit_roots(chi);
        if (!roots.empty()) {
            if (want_reducible) return OracleVerdict::in("rational root " + roots.front().str());
            return OracleVerdict::out("reducible, outside the alternating component");
        }
        const BigInt disc = cubic_discriminant(chi);
        if (auto r = exact_sqrt(disc)) {
            if (want_alternating) return OracleVerdict::in("irreducible with square discriminant " + disc.str() + ": A_3");
            return OracleVerdict::out("irreducible: outside the reducible component");
        }
        return OracleVerdict::out("irreducible, discriminant " + disc.str() + " not a square: S_3");
    }
    const auto roots = unit_roots(chi);
    if (!roots.empty()) return OracleVerdict::in("rational root " + roots.front().str() + ": intransitive");
    if (n == 4) {
        if (auto split = quartic_quadratic_split(chi)) return OracleVerdict::in("quadratic factor: intransitive");
    }
    const auto samples = frobenius_samples(chi, primes.empty() ? default_frobenius_primes() : primes);
    const int deg = static_cast<int>(n);
    std::optional<u64> full_cycle, transposition, long_cycle, jordan, odd;
    for (const auto& s : samples) {
        const auto& t = s.cycle_type;
        if (t.size() == 1) full_cycle = full_cycle.value_or(s.prime);
        if (detail::powers_to_transposition(t)) transposition = transposition.value_or(s.prime);
        if (t.size() == 2 && t[0] == deg - 1) long_cycle = long_cycle.value_or(s.prime);
        if (detail::powers_to_jordan_cycle(t, deg)) jordan = jordan.value_or(s.prime);
        if (detail::is_odd_permutation(t)) odd = odd.value_or(s.prime);
    }
    if (full_cycle && transposition && long_cycle) {
        return OracleVerdict::out("S_n: n-cycle at p=" + std::to_string(*full_cycle) + ", (n-1)-cycle at p=" +
                                  std::to_string(*long_cycle) + ", transposition power at p=" +
                                  std::to_string(*transposition));
    }
    if (full_cycle && jordan && odd) {
        return OracleVerdict::out("S_n: n-cycle at p=" + std::to_string(*full_cycle) + ", prime cycle at p=" +
                                  std::to_string(*jordan) + ", odd permutation at p=" + std::to_string(*odd));
    }
    return OracleVerdict::unknown("Frobenius sampling over " + std::to_string(samples.size()) +
                                  " primes did not certify S_n");
}

/// Nonzero integer vector spanning part of ker(g - lambda I), or nullopt when the kernel is trivial.
inline std::optional<std::vector<BigInt>> rational_eigenvector(const MatrixElement& g, long long lambda) {
    const std::size_t n = g.dimension();
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i][j] = Rational(g.at(i, j) - (i == j ? lambda : 0));
    }
    std::vector<int> pivot_col(n, -1);
    std::size_t row = 0;
    std::vector<bool> is_pivot(n, false);
    for (std::size_t col = 0; col < n && row < n; ++col) {
        std::size_t r = row;
        while (r < n && a[r][col] == 0) ++r;
        if (r == n) continue;
        std::swap(a[r], a[row]);
        const Rational inv = 1 / a[row][col];
        for (auto& v : a[row]) v *= inv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == row || a[i][col] == 0) continue;
            const Rational f = a[i][col];
            for (std::size_t j = 0; j < n; ++j) a[i][j] -= f * a[row][j];
        }
        pivot_col[row] = static_cast<int>(col);
        is_pivot[col] = true;
        ++row;
    }
    std::size_t free_col = n;
    for (std::size_t c = 0; c < n; ++c) {
        if (!is_pivot[c]) {
            free_col = c;
            break;
        }
    }
    if (free_col == n) return std::nullopt;
    std::vector<Rational> v(n, Rational(0));
    v[free_col] = 1;
    for (std::size_t r = 0; r < row; ++r) v[static_cast<std::size_t>(pivot_col[r])] = -a[r][free_col];
    BigInt lcm = 1;
    for (const auto& x : v) lcm = boost::multiprecision::lcm(lcm, boost::multiprecision::denominator(x));
    std::vector<BigInt> out;
    BigInt gcd = 0;
    for (const auto& x : v) {
        out.push_back(boost::multiprecision::numerator(Rational(x * lcm)));
        gcd = boost::multiprecision::gcd(gcd, out.back());
    }
    for (auto& x : out) x /= gcd;
    return out;
}

inline std::string vector_text(const std::vector<BigInt>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i].str();
    return s + ")";
}

/// det(g - lambda I) over Z.
inline BigInt shifted_determinant(const MatrixElement& g, long long lambda) {
    std::vector<BigInt> e = g.entries();
    const std::size_t n = g.dimension();
    for (std::size_t i = 0; i < n; ++i) e[i * n + i] -= lambda;
    return MatrixElement::bareiss_determinant(n, std::move(e));
}

/// Line case: IN iff g has a rational eigenvector, i.e. det(g - I) = 0 or det(g + I) = 0.
/// Full-flag case: IN iff every eigenvalue is rational (+-1), i.e. g is triangularizable over Q.
inline OracleVerdict rational_fixed_flag(const MatrixElement& g, FlagType flag = FlagType::Line) {
    if (flag == FlagType::Full) {
        IntPolynomial chi = char_poly(g);
        std::vector<BigInt> c = chi.coefficients();
        int plus = 0, minus = 0;
        auto divide_out = [&](long long r) {
            // synthetic division by (X - r) when r is a root
            while (c.size() > 1) {
                BigInt acc = 0;
                for (std::size_t i = c.size(); i-- > 0;) acc = acc * r + c[i];
                if (acc != 0) return;
                std::vector<BigInt> q(c.size() - 1);
                BigInt carry = 0;
                for (std::size_t i = c.size() - 1; i-- > 0;) {
                    carry = carry * r + c[i + 1];
                    q[i] = carry;
                }
                c = std::move(q);
                (r == 1 ? plus : minus)++;
            }
        };
        divide_out(1);
        divide_out(-1);
        if (c.size() == 1) {
            return OracleVerdict::in("characteristic polynomial (X-1)^" + std::to_string(plus) + "(X+1)^" +
                                     std::to_string(minus) + " splits: a rational full flag is fixed");
        }
        return OracleVerdict::out("characteristic polynomial has an irrational root");
    }
    for (long long lambda : {1LL, -1LL}) {
        if (shifted_determinant(g, lambda) == 0) {
            auto v = rational_eigenvector(g, lambda);
            return OracleVerdict::in("fixes the line through " + vector_text(*v) + " (eigenvalue " +
                                     std::to_string(lambda) + ")");
        }
    }
    return OracleVerdict::out("det(g-I) = " + shifted_determinant(g, 1).str() + ", det(g+I) = " +
                              shifted_determinant(g, -1).str());
}

inline OracleVerdict subvariety(std::span<const BigInt> coords, const std::vector<MultiPoly>& polys) {
    if (polys.empty()) throw ConfigError("subvariety needs at least one polynomial");
    for (std::size_t i = 0; i < polys.size(); ++i) {
        const BigInt v = polys[i].evaluate(coords);
        if (v != 0) return OracleVerdict::out("polynomial " + std::to_string(i) + " evaluates to " + v.str());
    }
    return OracleVerdict::in("all " + std::to_string(polys.size()) + " polynomials vanish");
}

inline OracleVerdict subvariety(const MatrixElement& g, const std::vector<MultiPoly>& polys) {
    return subvariety(std::span<const BigInt>(g.entries()), polys);
}
inline OracleVerdict subvariety(const AbelianElement& g, const std::vector<MultiPoly>& polys) {
    return subvariety(std::span<const BigInt>(g.exponents()), polys);
}

/// All exponents even: the image of squaring in the lattice <2,3> ~ Z^2.
inline OracleVerdict torus_squares(const AbelianElement& g) {
    for (std::size_t i = 0; i < g.rank(); ++i) {
        if (boost::multiprecision::abs(g[i]) % 2 != 0) {
            return OracleVerdict::out("exponent " + std::to_string(i) + " is odd");
        }
    }
    return OracleVerdict::in("all exponents even");
}

inline OracleVerdict proper_power(const AbelianElement& g, unsigned k) {
    if (k < 2) throw ConfigError("proper power needs k >= 2");
    std::vector<BigInt> root;
    for (std::size_t i = 0; i < g.rank(); ++i) {
        BigInt r = g[i] % k;
        if (r < 0) r += k;
        if (r != 0) {
            return OracleVerdict::out("exponent " + std::to_string(i) + " is " + r.str() + " mod " + std::to_string(k));
        }
        root.push_back(g[i] / k);
    }
    return OracleVerdict::in("root " + vector_text(root));
}

// ---------------------------------------------------------------------------
// Residual conditions on finite quotients.

namespace detail {

inline IntPolynomial char_poly_of_mod(const ModMatrix& m) {
    std::vector<BigInt> e;
    for (u32 v : m.e) e.emplace_back(v);
    // Faddeev-LeVerrier needs exact division by k <= n; work over Z on the
    // representatives (det may not be 1 over Z), then reduce mod p.
    const std::size_t n = m.n;
    std::vector<BigInt> c(n + 1, BigInt(0));
    c[n] = 1;
    std::vector<BigInt> cur(n * n, BigInt(0)), nxt(n * n, BigInt(0));
    for (std::size_t k = 1; k <= n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                BigInt acc = 0;
                for (std::size_t l = 0; l < n; ++l) acc += e[i * n + l] * cur[l * n + j];
                nxt[i * n + j] = acc;
            }
        }
        for (std::size_t i = 0; i < n; ++i) nxt[i * n + i] += c[n - k + 1];
        cur.swap(nxt);
        BigInt tr = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t l = 0; l < n; ++l) tr += e[i * n + l] * cur[l * n + i];
        }
        c[n - k] = -tr / static_cast<long long>(k);
    }
    return IntPolynomial(std::move(c));
}

inline PolyModP char_poly_mod(const ModMatrix& m, u64 p) { return PolyModP::from_int(char_poly_of_mod(m), p); }

inline bool reducible_mod(const PolyModP& f) {
    if (f.degree() <= 1) return false;
    if (!is_squarefree(f)) return true;
    return factor_degrees(f).size() > 1;
}

inline bool has_root_mod(const PolyModP& f) {
    if (f.degree() < 1) return false;
    // gcd(f, X^p - X) collects the linear factors
    const PolyModP x = PolyModP::monomial_x(f.p);
    const PolyModP g = poly_gcd(f, poly_sub(poly_powmod(x, f.p, poly_monic(f)), x));
    return g.degree() >= 1;
}

inline bool is_square_mod(u64 a, u64 p) {
    a %= p;
    if (a == 0 || p == 2) return true;
    return powmod(a, (p - 1) / 2, p) == 1;
}

/// f mod p equals (X-1)^a (X+1)^b for some a, b.
inline bool splits_into_unit_roots_mod(PolyModP f) {
    for (u64 r : {u64{1}, f.p - 1}) {
        const PolyModP lin{f.p, {(f.p - r) % f.p, 1}};
        while (f.degree() >= 1) {
            PolyModP q;
            if (!poly_divmod(f, lin, &q).is_zero()) break;
            f = q;
        }
    }
    return f.degree() == 0;
}

}  // namespace detail

/// Global oracle plus residual tests for thin sets in SL_n(Z).
class MatrixThinSet {
public:
    MatrixThinSet(ThinSetSpec spec, std::optional<GeneratorMultiset<MatrixElement>> gens = std::nullopt)
        : spec_(std::move(spec)), gens_(std::move(gens)) {
        if (spec_.kind == ThinSetKind::TorusSquares) throw ConfigError("TORUS_SQUARES needs an abelian group");
        if (spec_.kind == ThinSetKind::ProperPower) {
            if (!gens_) throw ConfigError("PROPER_POWER on matrices needs the generator multiset");
            if (spec_.primes.empty()) spec_.primes = {3, 5, 7};
            for (u64 p : spec_.primes) power_tables_.emplace(p, power_codes(SlModPrime(dimension(), p)));
        }
    }

    const ThinSetSpec& spec() const noexcept { return spec_; }

    OracleVerdict operator()(const MatrixElement& g) const {
        switch (spec_.kind) {
            case ThinSetKind::ReducibleCharpoly: return reducible_charpoly(g, spec_.primes);
            case ThinSetKind::NongenericGalois: return generic_galois(g, "S_n", spec_.primes, spec_.galois_component);
            case ThinSetKind::RationalFixedFlag: return rational_fixed_flag(g, spec_.flag);
            case ThinSetKind::Subvariety: return subvariety(g, spec_.polys);
            case ThinSetKind::ProperPower: return proper_power_verdict(g);
            case ThinSetKind::TorusSquares: break;
        }
        throw ConfigError("unsupported kind for matrices");
    }

    /// Residual condition at a single prime; contains the reduction of the global set.
    bool residual_contains(const SlModPrime& q, const ModMatrix& x) const {
        const u64 p = q.prime();
        switch (spec_.kind) {
            case ThinSetKind::ReducibleCharpoly: return detail::reducible_mod(detail::char_poly_mod(x, p));
            case ThinSetKind::NongenericGalois: return galois_residual(x, p);
            case ThinSetKind::RationalFixedFlag: {
                if (spec_.flag == FlagType::Full) return detail::splits_into_unit_roots_mod(detail::char_poly_mod(x, p));
                for (u64 lambda : {u64{1}, p - 1}) {
                    ModMatrix s = x;
                    for (u32 i = 0; i < s.n; ++i) s.at(i, i) = static_cast<u32>((s.at(i, i) + p - lambda) % p);
                    if (mod_determinant(s, p) == 0) return true;
                }
                return false;
            }
            case ThinSetKind::Subvariety:
                for (const auto& poly : spec_.polys) {
                    if (poly.evaluate_mod(std::span<const u32>(x.e), p) != 0) return false;
                }
                return true;
            case ThinSetKind::ProperPower: {
                auto it = power_tables_.find(p);
                if (it == power_tables_.end()) {
                    auto [ins, _] = power_tables_.emplace(p, power_codes(q));
                    it = ins;
                }
                return it->second.count(q.encode(x)) > 0;
            }
            case ThinSetKind::TorusSquares: break;
        }
        throw ConfigError("unsupported kind for matrices");
    }

    /// On a product quotient the residual is the product of the factor residuals.
    bool residual_contains(const SlModPair& q, const SlModPair::element_type& x) const {
        return residual_contains(q.first(), x.first) && residual_contains(q.second(), x.second);
    }

private:
    unsigned dimension() const { return static_cast<unsigned>(gens_->identity().dimension()); }

    bool galois_residual(const ModMatrix& x, u64 p) const {
        const PolyModP f = detail::char_poly_mod(x, p);
        const int n = f.degree();
        if (n <= 1) return false;
        if (n == 2) return detail::reducible_mod(f);
        if (n == 3) {
            const bool root = detail::has_root_mod(f);
            // discriminant of the residue cubic
            std::vector<BigInt> c;
            for (u64 v : f.c) c.emplace_back(v);
            const BigInt disc = cubic_discriminant(IntPolynomial(std::move(c)));
            const bool square = detail::is_square_mod(mod_u64(disc, p), p);
            if (spec_.galois_component == "reducible") return root;
            if (spec_.galois_component == "alternating") return square;
            return root || square;
        }
        return true;  // no single-prime condition for degree >= 4
    }

    std::unordered_set<u64> power_codes(const SlModPrime& q) const {
        const auto reduced = reduce_generators(q, *gens_);
        const CayleyTable table = build_cayley_table(q, reduced.elements, reduced.weights);
        std::unordered_set<u64> codes;
        for (u64 c : table.codes) codes.insert(q.encode(mod_power(q.decode(c), spec_.power, q.prime())));
        return codes;
    }

    OracleVerdict proper_power_verdict(const MatrixElement& g) const {
        const unsigned k = spec_.power;
        if (g.is_identity()) return OracleVerdict::in("identity is its own k-th root");
        // bounded root search over words of length <= depth
        std::vector<MatrixElement> ball{MatrixElement::identity(g.dimension())};
        std::unordered_set<MatrixElement, ElementHash> seen(ball.begin(), ball.end());
        std::vector<MatrixElement> frontier = ball;
        for (unsigned d = 0; d < spec_.search_depth; ++d) {
            std::vector<MatrixElement> next;
            for (const auto& h : frontier) {
                for (const auto& a : gens_->distinct()) {
                    MatrixElement w = compose(h, a);
                    if (seen.insert(w).second) next.push_back(w);
                }
            }
            ball.insert(ball.end(), next.begin(), next.end());
            frontier.swap(next);
        }
        for (const auto& h : ball) {
            MatrixElement pw = h;
            for (unsigned i = 1; i < k; ++i) pw = compose(pw, h);
            if (pw == g) return OracleVerdict::in("root " + h.key());
        }
        for (u64 p : spec_.primes) {
            const SlModPrime q(dimension(), p);
            if (!power_tables_.at(p).count(q.encode(q.reduce(g)))) {
                return OracleVerdict::out("residue mod " + std::to_string(p) + " is not a " + std::to_string(k) +
                                          "-th power in the image");
            }
        }
        return OracleVerdict::unknown("no root within depth " + std::to_string(spec_.search_depth) +
                                      " and no obstruction mod the schedule primes");
    }

    ThinSetSpec spec_;
    std::optional<GeneratorMultiset<MatrixElement>> gens_;
    mutable std::unordered_map<u64, std::unordered_set<u64>> power_tables_;
};

/// Global oracle plus residual tests for thin sets in Z^r.
class AbelianThinSet {
public:
    explicit AbelianThinSet(ThinSetSpec spec) : spec_(std::move(spec)) {
        switch (spec_.kind) {
            case ThinSetKind::TorusSquares:
            case ThinSetKind::ProperPower:
            case ThinSetKind::Subvariety: break;
            default: throw ConfigError(std::string(to_string(spec_.kind)) + " needs a matrix group");
        }
    }

    const ThinSetSpec& spec() const noexcept { return spec_; }

    OracleVerdict operator()(const AbelianElement& g) const {
        switch (spec_.kind) {
            case ThinSetKind::TorusSquares: return torus_squares(g);
            case ThinSetKind::ProperPower: return proper_power(g, spec_.power);
            case ThinSetKind::Subvariety: return subvariety(g, spec_.polys);
            default: break;
        }
        throw ConfigError("unsupported kind for abelian groups");
    }

    bool residual_contains(const CyclicProduct& q, const CyclicProduct::element_type& x) const {
        const auto& m = q.moduli();
        switch (spec_.kind) {
            case ThinSetKind::TorusSquares:
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (m[i] % 2 == 0 && x[i] % 2 != 0) return false;
                }
                return true;
            case ThinSetKind::ProperPower:
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (x[i] % std::gcd<u64>(spec_.power, m[i]) != 0) return false;
                }
                return true;
            case ThinSetKind::Subvariety: {
                for (u64 mi : m) {
                    if (mi != m.front() || !is_prime(mi)) {
                        throw ConfigError("subvariety residual needs a common prime modulus");
                    }
                }
                for (const auto& poly : spec_.polys) {
                    if (poly.evaluate_mod(std::span<const u64>(x), m.front()) != 0) return false;
                }
                return true;
            }
            default: break;
        }
        throw ConfigError("unsupported kind for abelian groups");
    }

private:
    ThinSetSpec spec_;
};

enum class ResidualMode { Enumerate, Sample };

struct ResidualResult {
    std::string modulus;
    BigInt size = 0;
    std::uint64_t count = 0;      // residual elements among those examined
    std::uint64_t examined = 0;
    double density = 0.0;
    double half_width = 0.0;      // zero for exact enumeration
    ResidualMode mode = ResidualMode::Enumerate;

    nlohmann::json to_json() const {
        return {{"modulus", modulus},
                {"order", size.str()},
                {"residual_count", count},
                {"examined", examined},
                {"density", density},
                {"ci_halfwidth", half_width},
                {"mode", mode == ResidualMode::Enumerate ? "enumerate" : "sample"}};
    }
};

/// |residual| / |quotient| by full enumeration or by uniform sampling.
template <FiniteGroup G, class ThinSet>
ResidualResult residual(const ThinSet& oracle, const G& quotient, ResidualMode mode,
                        std::size_t budget = kDefaultEnumerationBudget, std::uint64_t samples = 100'000,
                        std::uint64_t seed = 1) {
    ResidualResult r;
    r.modulus = quotient.label();
    r.size = quotient.order();
    r.mode = mode;
    if (mode == ResidualMode::Enumerate) {
        if (r.size > budget) {
            throw BudgetExceeded("quotient " + r.modulus + " of order " + r.size.str() + " exceeds enumeration budget");
        }
        quotient.for_each([&](const typename G::element_type& x) {
            ++r.examined;
            if (oracle.residual_contains(quotient, x)) ++r.count;
        });
        r.density = static_cast<double>(r.count) / static_cast<double>(r.examined);
        return r;
    }
    if constexpr (requires { quotient.sample(CounterRng(seed), std::uint64_t{0}); }) {
        const CounterRng rng(seed);
        for (std::uint64_t i = 0; i < samples; ++i) {
            ++r.examined;
            if (oracle.residual_contains(quotient, quotient.sample(rng, i))) ++r.count;
        }
        const double m = static_cast<double>(samples);
        r.density = static_cast<double>(r.count) / m;
        r.half_width = 1.96 * std::sqrt(r.density * (1.0 - r.density) / m);
        return r;
    } else {
        throw ConfigError("quotient " + r.modulus + " does not support sampling");
    }
}

}  // namespace thinwalk
