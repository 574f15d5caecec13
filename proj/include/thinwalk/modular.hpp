#pragma once

// Prime-field arithmetic: small-prime tests, matrices over F_p, and
// polynomials over F_p with squarefree testing and distinct-degree factorization.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"
#include "matgroup.hpp"

namespace thinwalk {

using u64 = std::uint64_t;
using u32 = std::uint32_t;

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<unsigned __int128>(a) * b % m); }

inline u64 powmod(u64 base, u64 exp, u64 m) {
    u64 result = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1U) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1U;
    }
    return result;
}

/// Deterministic Miller-Rabin for 64-bit integers.
inline bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1U) == 0) {
        d >>= 1U;
        ++s;
    }
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

inline u64 next_prime_at_least(u64 n) {
    if (n <= 2) return 2;
    while (!is_prime(n)) ++n;
    return n;
}

inline u64 inv_mod(u64 a, u64 p) {
    a %= p;
    if (a == 0) throw DomainError("zero has no inverse mod " + std::to_string(p));
    return powmod(a, p - 2, p);
}

/// Square n x n matrix over F_p, entries in [0, p).
struct ModMatrix {
    u32 n = 0;
    std::vector<u32> e;

    u32 at(u32 i, u32 j) const { return e[i * n + j]; }
    u32& at(u32 i, u32 j) { return e[i * n + j]; }

    friend bool operator==(const ModMatrix& a, const ModMatrix& b) { return a.n == b.n && a.e == b.e; }

    static ModMatrix identity(u32 n) {
        ModMatrix m{n, std::vector<u32>(static_cast<std::size_t>(n) * n, 0)};
        for (u32 i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }
};

inline ModMatrix mod_multiply(const ModMatrix& a, const ModMatrix& b, u64 p) {
    const u32 n = a.n;
    ModMatrix c{n, std::vector<u32>(static_cast<std::size_t>(n) * n, 0)};
    for (u32 i = 0; i < n; ++i) {
        for (u32 j = 0; j < n; ++j) {
            u64 acc = 0;
            for (u32 k = 0; k < n; ++k) acc += static_cast<u64>(a.at(i, k)) * b.at(k, j);
            c.at(i, j) = static_cast<u32>(acc % p);
        }
    }
    return c;
}

inline ModMatrix mod_power(ModMatrix base, u64 k, u64 p) {
    ModMatrix result = ModMatrix::identity(base.n);
    while (k) {
        if (k & 1U) result = mod_multiply(result, base, p);
        base = mod_multiply(base, base, p);
        k >>= 1U;
    }
    return result;
}

/// Gaussian-elimination determinant over F_p.
inline u64 mod_determinant(ModMatrix m, u64 p) {
    const u32 n = m.n;
    u64 det = 1;
    for (u32 col = 0; col < n; ++col) {
        u32 pivot = col;
        while (pivot < n && m.at(pivot, col) == 0) ++pivot;
        if (pivot == n) return 0;
        if (pivot != col) {
            for (u32 j = 0; j < n; ++j) std::swap(m.at(col, j), m.at(pivot, j));
            det = (p - det) % p;
        }
        det = mulmod(det, m.at(col, col), p);
        const u64 inv = inv_mod(m.at(col, col), p);
        for (u32 i = col + 1; i < n; ++i) {
            const u64 f = mulmod(m.at(i, col), inv, p);
            if (f == 0) continue;
            for (u32 j = col; j < n; ++j) {
                m.at(i, j) = static_cast<u32>((m.at(i, j) + p - mulmod(f, m.at(col, j), p)) % p);
            }
        }
    }
    return det;
}

inline ModMatrix reduce_mod(const MatrixElement& g, u64 p) {
    const auto n = static_cast<u32>(g.dimension());
    ModMatrix m{n, std::vector<u32>(static_cast<std::size_t>(n) * n, 0)};
    for (std::size_t i = 0; i < g.entries().size(); ++i) m.e[i] = static_cast<u32>(mod_u64(g.entries()[i], p));
    return m;
}

/// Polynomial over F_p, constant term first, no trailing zeros (zero polynomial is empty).
struct PolyModP {
    u64 p = 2;
    std::vector<u64> c;

    int degree() const { return static_cast<int>(c.size()) - 1; }
    bool is_zero() const { return c.empty(); }

    void trim() {
        while (!c.empty() && c.back() == 0) c.pop_back();
    }

    static PolyModP from_int(const IntPolynomial& f, u64 p) {
        PolyModP r{p, {}};
        for (const auto& a : f.coefficients()) r.c.push_back(mod_u64(a, p));
        r.trim();
        return r;
    }

    static PolyModP monomial_x(u64 p) { return PolyModP{p, {0, 1 % p}}.trimmed(); }

    PolyModP trimmed() const {
        PolyModP r = *this;
        r.trim();
        return r;
    }

    u64 evaluate(u64 x) const {
        u64 acc = 0;
        for (std::size_t i = c.size(); i-- > 0;) acc = (mulmod(acc, x, p) + c[i]) % p;
        return acc;
    }
};

inline PolyModP poly_sub(const PolyModP& a, const PolyModP& b) {
    PolyModP r{a.p, std::vector<u64>(std::max(a.c.size(), b.c.size()), 0)};
    for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] = a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i] = (r.c[i] + a.p - b.c[i]) % a.p;
    r.trim();
    return r;
}

inline PolyModP poly_mul(const PolyModP& a, const PolyModP& b) {
    if (a.is_zero() || b.is_zero()) return PolyModP{a.p, {}};
    PolyModP r{a.p, std::vector<u64>(a.c.size() + b.c.size() - 1, 0)};
    for (std::size_t i = 0; i < a.c.size(); ++i) {
        for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] = (r.c[i + j] + mulmod(a.c[i], b.c[j], a.p)) % a.p;
    }
    r.trim();
    return r;
}

/// Remainder of a modulo a non-zero b; quotient written to q when given.
inline PolyModP poly_divmod(PolyModP a, const PolyModP& b, PolyModP* q = nullptr) {
    if (b.is_zero()) throw DomainError("polynomial division by zero");
    const u64 p = a.p;
    const u64 lead_inv = inv_mod(b.c.back(), p);
    PolyModP quot{p, std::vector<u64>(a.c.size() >= b.c.size() ? a.c.size() - b.c.size() + 1 : 0, 0)};
    while (!a.is_zero() && a.degree() >= b.degree()) {
        const auto shift = static_cast<std::size_t>(a.degree() - b.degree());
        const u64 f = mulmod(a.c.back(), lead_inv, p);
        quot.c[shift] = f;
        for (std::size_t i = 0; i < b.c.size(); ++i) {
            a.c[i + shift] = (a.c[i + shift] + p - mulmod(f, b.c[i], p)) % p;
        }
        a.trim();
    }
    if (q) {
        quot.trim();
        *q = std::move(quot);
    }
    return a;
}

inline PolyModP poly_monic(PolyModP a) {
    if (a.is_zero()) return a;
    const u64 inv = inv_mod(a.c.back(), a.p);
    for (auto& v : a.c) v = mulmod(v, inv, a.p);
    return a;
}

inline PolyModP poly_gcd(PolyModP a, PolyModP b) {
    while (!b.is_zero()) {
        PolyModP r = poly_divmod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return poly_monic(std::move(a));
}

inline PolyModP poly_derivative(const PolyModP& a) {
    PolyModP r{a.p, {}};
    for (std::size_t i = 1; i < a.c.size(); ++i) r.c.push_back(mulmod(a.c[i], i % a.p, a.p));
    r.trim();
    return r;
}

/// base^e mod m, for polynomials.
inline PolyModP poly_powmod(PolyModP base, u64 e, const PolyModP& m) {
    PolyModP result{m.p, {1 % m.p}};
    result.trim();
    base = poly_divmod(std::move(base), m);
    while (e) {
        if (e & 1U) result = poly_divmod(poly_mul(result, base), m);
        e >>= 1U;
        if (e) base = poly_divmod(poly_mul(base, base), m);
    }
    return result;
}

inline bool is_squarefree(const PolyModP& f) {
    if (f.degree() <= 0) return true;
    const PolyModP d = poly_derivative(f);
    if (d.is_zero()) return false;
    return poly_gcd(f, d).degree() == 0;
}

/// Degrees of the irreducible factors of a monic squarefree f, sorted descending.
/// For unramified p this is the cycle type of the Frobenius permutation on the roots.
inline std::vector<int> factor_degrees(const PolyModP& f_in) {
    PolyModP f = poly_monic(f_in);
    std::vector<int> degrees;
    const PolyModP x = PolyModP::monomial_x(f.p);
    PolyModP h = x;  // X^{p^d} mod f
    int d = 0;
    while (f.degree() >= 2 * (d + 1)) {
        ++d;
        h = poly_powmod(h, f.p, f);
        PolyModP g = poly_gcd(f, poly_sub(h, x));
        if (g.degree() > 0) {
            for (int k = 0; k < g.degree() / d; ++k) degrees.push_back(d);
            PolyModP q;
            poly_divmod(f, g, &q);
            f = q;
            h = poly_divmod(h, f);
        }
    }
    if (f.degree() > 0) degrees.push_back(f.degree());
    std::sort(degrees.rbegin(), degrees.rend());
    return degrees;
}

}  // namespace thinwalk
