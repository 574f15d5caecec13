#pragma once

// Exact group elements: SL_n(Z) matrices and integer exponent lattices Z^r,
// plus symmetric generator multisets and integer characteristic polynomials.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"

namespace thinwalk {

/// Square integer matrix of determinant one.
class MatrixElement {
public:
    MatrixElement() = default;

    static MatrixElement identity(std::size_t n) {
        if (n == 0) throw ConfigError("matrix dimension must be positive");
        MatrixElement m(n);
        for (std::size_t i = 0; i < n; ++i) m.entries_[i * n + i] = 1;
        return m;
    }

    /// Row-major entries; throws DomainError unless det == 1.
    static MatrixElement from_entries(std::size_t n, std::vector<BigInt> entries) {
        if (n == 0) throw ConfigError("matrix dimension must be positive");
        if (entries.size() != n * n) throw ConfigError("entry count does not match dimension");
        MatrixElement m(n);
        m.entries_ = std::move(entries);
        if (m.determinant() != 1) throw DomainError("matrix determinant is " + m.determinant().str() + ", not 1");
        return m;
    }

    static MatrixElement from_rows(std::initializer_list<std::initializer_list<long long>> rows) {
        const std::size_t n = rows.size();
        std::vector<BigInt> e;
        e.reserve(n * n);
        for (const auto& row : rows) {
            if (row.size() != n) throw ConfigError("matrix rows must have equal length n");
            for (long long v : row) e.emplace_back(v);
        }
        return from_entries(n, std::move(e));
    }

    std::size_t dimension() const noexcept { return n_; }
    const BigInt& at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    const std::vector<BigInt>& entries() const noexcept { return entries_; }

    BigInt trace() const {
        BigInt t = 0;
        for (std::size_t i = 0; i < n_; ++i) t += at(i, i);
        return t;
    }

    /// Fraction-free (Bareiss) determinant.
    BigInt determinant() const { return bareiss_determinant(n_, entries_); }

    static BigInt bareiss_determinant(std::size_t n, std::vector<BigInt> a) {
        BigInt prev = 1;
        int sign = 1;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (a[k * n + k] == 0) {
                std::size_t swap = k + 1;
                while (swap < n && a[swap * n + k] == 0) ++swap;
                if (swap == n) return 0;
                for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[swap * n + j]);
                sign = -sign;
            }
            for (std::size_t i = k + 1; i < n; ++i) {
                for (std::size_t j = k + 1; j < n; ++j) {
                    a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
                }
            }
            prev = a[k * n + k];
        }
        return sign * a[(n - 1) * n + (n - 1)];
    }

    bool is_identity() const {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                if (at(i, j) != (i == j ? 1 : 0)) return false;
            }
        }
        return true;
    }

    friend bool operator==(const MatrixElement& a, const MatrixElement& b) {
        return a.n_ == b.n_ && a.entries_ == b.entries_;
    }

    /// Product of two det-1 matrices; the result needs no determinant check.
    friend MatrixElement compose(const MatrixElement& a, const MatrixElement& b) {
        MatrixElement out;
        multiply_into(out, a, b);
        return out;
    }

    /// out = a * b without reallocating out when its shape already matches.
    static void multiply_into(MatrixElement& out, const MatrixElement& a, const MatrixElement& b) {
        if (a.n_ != b.n_) throw ConfigError("dimension mismatch in compose");
        const std::size_t n = a.n_;
        if (out.n_ != n || out.entries_.size() != n * n) {
            out.n_ = n;
            out.entries_.assign(n * n, BigInt(0));
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                BigInt& acc = out.entries_[i * n + j];
                acc = a.entries_[i * n] * b.entries_[j];
                for (std::size_t k = 1; k < n; ++k) acc += a.entries_[i * n + k] * b.entries_[k * n + j];
            }
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < n_; ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t j = 0; j < n_; ++j) row.push_back(at(i, j).str());
            rows.push_back(std::move(row));
        }
        return rows;
    }

    /// Accepts nested rows of decimal strings (or small JSON integers).
    static MatrixElement from_json(const nlohmann::json& j) {
        if (!j.is_array() || j.empty()) throw ConfigError("matrix must be a non-empty array of rows");
        const std::size_t n = j.size();
        std::vector<BigInt> e;
        e.reserve(n * n);
        for (const auto& row : j) {
            if (!row.is_array() || row.size() != n) throw ConfigError("matrix must be square");
            for (const auto& v : row) {
                if (v.is_string()) e.push_back(parse_bigint(v.get<std::string>()));
                else if (v.is_number_integer()) e.emplace_back(v.get<long long>());
                else throw ConfigError("matrix entries must be decimal strings");
            }
        }
        return from_entries(n, std::move(e));
    }

    /// Canonical text form used for ordering and logs.
    std::string key() const {
        std::string s;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (i) s += ',';
            s += entries_[i].str();
        }
        return s;
    }

private:
    explicit MatrixElement(std::size_t n) : n_(n), entries_(n * n, BigInt(0)) {}

    std::size_t n_ = 0;
    std::vector<BigInt> entries_;
};

MatrixElement compose(const MatrixElement& a, const MatrixElement& b);

/// Element of the exponent lattice Z^r under addition.
class AbelianElement {
public:
    AbelianElement() = default;
    explicit AbelianElement(std::vector<BigInt> exponents) : exps_(std::move(exponents)) {
        if (exps_.empty()) throw ConfigError("abelian rank must be positive");
    }
    AbelianElement(std::initializer_list<long long> exps) {
        for (long long v : exps) exps_.emplace_back(v);
        if (exps_.empty()) throw ConfigError("abelian rank must be positive");
    }

    static AbelianElement identity(std::size_t rank) { return AbelianElement(std::vector<BigInt>(rank, BigInt(0))); }

    std::size_t rank() const noexcept { return exps_.size(); }
    const BigInt& operator[](std::size_t i) const { return exps_[i]; }
    const std::vector<BigInt>& exponents() const noexcept { return exps_; }

    bool is_identity() const {
        return std::all_of(exps_.begin(), exps_.end(), [](const BigInt& v) { return v == 0; });
    }

    friend bool operator==(const AbelianElement& a, const AbelianElement& b) { return a.exps_ == b.exps_; }

    friend AbelianElement compose(const AbelianElement& a, const AbelianElement& b) {
        if (a.rank() != b.rank()) throw ConfigError("rank mismatch in compose");
        AbelianElement out = a;
        for (std::size_t i = 0; i < out.exps_.size(); ++i) out.exps_[i] += b.exps_[i];
        return out;
    }

    static void multiply_into(AbelianElement& out, const AbelianElement& a, const AbelianElement& b) {
        if (a.rank() != b.rank()) throw ConfigError("rank mismatch in compose");
        if (&out != &a) out = a;
        for (std::size_t i = 0; i < out.exps_.size(); ++i) out.exps_[i] += b.exps_[i];
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& v : exps_) arr.push_back(v.str());
        return arr;
    }

    static AbelianElement from_json(const nlohmann::json& j) {
        if (!j.is_array() || j.empty()) throw ConfigError("abelian element must be a non-empty array");
        std::vector<BigInt> e;
        for (const auto& v : j) {
            if (v.is_string()) e.push_back(parse_bigint(v.get<std::string>()));
            else if (v.is_number_integer()) e.emplace_back(v.get<long long>());
            else throw ConfigError("exponents must be decimal strings");
        }
        return AbelianElement(std::move(e));
    }

    std::string key() const {
        std::string s;
        for (std::size_t i = 0; i < exps_.size(); ++i) {
            if (i) s += ',';
            s += exps_[i].str();
        }
        return s;
    }

private:
    std::vector<BigInt> exps_;
};

AbelianElement compose(const AbelianElement& a, const AbelianElement& b);

struct ElementHash {
    std::size_t operator()(const MatrixElement& m) const {
        std::size_t h = m.dimension();
        for (const auto& e : m.entries()) h = h * 1000003U ^ std::hash<BigInt>{}(e);
        return h;
    }
    std::size_t operator()(const AbelianElement& a) const {
        std::size_t h = a.rank();
        for (const auto& e : a.exponents()) h = h * 1000003U ^ std::hash<BigInt>{}(e);
        return h;
    }
};

inline MatrixElement identity_like(const MatrixElement& g) { return MatrixElement::identity(g.dimension()); }
inline AbelianElement identity_like(const AbelianElement& g) { return AbelianElement::identity(g.rank()); }

inline AbelianElement inverse(const AbelianElement& a) {
    std::vector<BigInt> e = a.exponents();
    for (auto& v : e) v = -v;
    return AbelianElement(std::move(e));
}

/// Monic integer polynomial, coefficients stored constant term first.
class IntPolynomial {
public:
    IntPolynomial() : coeffs_{BigInt(1)} {}
    explicit IntPolynomial(std::vector<BigInt> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty() || coeffs_.back() != 1) throw DomainError("polynomial must be monic");
    }
    IntPolynomial(std::initializer_list<long long> coeffs) {
        for (long long c : coeffs) coeffs_.emplace_back(c);
        if (coeffs_.empty() || coeffs_.back() != 1) throw DomainError("polynomial must be monic");
    }

    std::size_t degree() const noexcept { return coeffs_.size() - 1; }
    const BigInt& operator[](std::size_t i) const { return coeffs_[i]; }
    const std::vector<BigInt>& coefficients() const noexcept { return coeffs_; }

    BigInt evaluate(const BigInt& x) const {
        BigInt acc = 0;
        for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + coeffs_[i];
        return acc;
    }

    friend bool operator==(const IntPolynomial& a, const IntPolynomial& b) { return a.coeffs_ == b.coeffs_; }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : coeffs_) arr.push_back(c.str());
        return arr;
    }

    std::string to_string() const {
        std::string s;
        for (std::size_t i = coeffs_.size(); i-- > 0;) {
            const BigInt& c = coeffs_[i];
            if (c == 0) continue;
            const bool neg = c < 0;
            BigInt mag = neg ? BigInt(-c) : c;
            if (!s.empty()) s += neg ? " - " : " + ";
            else if (neg) s += "-";
            if (mag != 1 || i == 0) s += mag.str();
            if (i >= 1) s += "X";
            if (i >= 2) s += "^" + std::to_string(i);
        }
        return s.empty() ? "0" : s;
    }

private:
    std::vector<BigInt> coeffs_;
};

/// det(X*I - g) by the Faddeev-LeVerrier recurrence; every division is exact over Z.
inline IntPolynomial char_poly(const MatrixElement& g) {
    const std::size_t n = g.dimension();
    std::vector<BigInt> c(n + 1, BigInt(0));
    c[n] = 1;
    std::vector<BigInt> m(n * n, BigInt(0));
    std::vector<BigInt> am(n * n, BigInt(0));
    for (std::size_t k = 1; k <= n; ++k) {
        // m <- g * m_prev + c[n-k+1] * I, then am <- g * m.
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                BigInt acc = 0;
                for (std::size_t l = 0; l < n; ++l) acc += g.at(i, l) * m[l * n + j];
                am[i * n + j] = std::move(acc);
            }
        }
        for (std::size_t i = 0; i < n; ++i) am[i * n + i] += c[n - k + 1];
        m.swap(am);
        BigInt tr = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t l = 0; l < n; ++l) tr += g.at(i, l) * m[l * n + i];
        }
        c[n - k] = -tr / static_cast<long long>(k);
    }
    return IntPolynomial(std::move(c));
}

/// Inverse via Cayley-Hamilton: g^{-1} = -(g^{n-1} + c_{n-1} g^{n-2} + ... + c_1 I) / c_0, c_0 = (-1)^n.
inline MatrixElement inverse(const MatrixElement& g) {
    const std::size_t n = g.dimension();
    const IntPolynomial chi = char_poly(g);
    std::vector<BigInt> acc(n * n, BigInt(0));
    for (std::size_t i = 0; i < n; ++i) acc[i * n + i] = 1;  // Horner: start with leading coefficient
    for (std::size_t k = n - 1; k >= 1; --k) {
        std::vector<BigInt> next(n * n, BigInt(0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                BigInt s = 0;
                for (std::size_t l = 0; l < n; ++l) s += acc[i * n + l] * g.at(l, j);
                next[i * n + j] = std::move(s);
            }
        }
        for (std::size_t i = 0; i < n; ++i) next[i * n + i] += chi[k];
        acc.swap(next);
        if (k == 1) break;
    }
    if (n == 1) acc[0] = 1;
    const BigInt& c0 = chi[0];
    for (auto& v : acc) v = -v / c0;
    return MatrixElement::from_entries(n, std::move(acc));
}

/// Symmetric multiset containing the identity; the distinct elements keep first-seen order.
template <class E>
class GeneratorMultiset {
public:
    const std::vector<E>& distinct() const noexcept { return distinct_; }
    const std::vector<unsigned>& multiplicities() const noexcept { return mult_; }
    /// Elements repeated by multiplicity; uniform draws index into this.
    const std::vector<E>& expanded() const noexcept { return expanded_; }
    std::size_t size() const noexcept { return expanded_.size(); }
    const E& identity() const { return distinct_[identity_index_]; }

    template <class F>
    friend GeneratorMultiset<F> validate_generators(const std::vector<F>& raw);

private:
    std::vector<E> distinct_;
    std::vector<unsigned> mult_;
    std::vector<E> expanded_;
    std::size_t identity_index_ = 0;
};

inline void check_same_shape(const MatrixElement& a, const MatrixElement& b) {
    if (a.dimension() != b.dimension()) throw ConfigError("generators have different dimensions");
}
inline void check_same_shape(const AbelianElement& a, const AbelianElement& b) {
    if (a.rank() != b.rank()) throw ConfigError("generators have different ranks");
}

class NotSymmetric : public ConfigError {
public:
    explicit NotSymmetric(const std::string& what) : ConfigError(what) {}
};
class MissingIdentity : public ConfigError {
public:
    explicit MissingIdentity(const std::string& what) : ConfigError(what) {}
};

template <class E>
GeneratorMultiset<E> validate_generators(const std::vector<E>& raw) {
    if (raw.empty()) throw ConfigError("generator multiset is empty");
    GeneratorMultiset<E> out;
    std::unordered_map<E, std::size_t, ElementHash> index;
    for (const auto& g : raw) {
        check_same_shape(g, raw.front());
        auto [it, fresh] = index.emplace(g, out.distinct_.size());
        if (fresh) {
            out.distinct_.push_back(g);
            out.mult_.push_back(1);
        } else {
            ++out.mult_[it->second];
        }
    }
    for (std::size_t i = 0; i < out.distinct_.size(); ++i) {
        const E inv = inverse(out.distinct_[i]);
        auto it = index.find(inv);
        const unsigned inv_mult = it == index.end() ? 0U : out.mult_[it->second];
        if (inv_mult != out.mult_[i]) {
            throw NotSymmetric("generator " + out.distinct_[i].key() + " has multiplicity " +
                               std::to_string(out.mult_[i]) + " but its inverse has " + std::to_string(inv_mult));
        }
    }
    bool found = false;
    for (std::size_t i = 0; i < out.distinct_.size(); ++i) {
        if (out.distinct_[i].is_identity()) {
            out.identity_index_ = i;
            found = true;
            break;
        }
    }
    if (!found) throw MissingIdentity("generator multiset does not contain the identity");
    for (std::size_t i = 0; i < out.distinct_.size(); ++i) {
        for (unsigned k = 0; k < out.mult_[i]; ++k) out.expanded_.push_back(out.distinct_[i]);
    }
    return out;
}

// Built-in generating sets.

/// Elementary matrix I + sign * e_{ij}.
inline MatrixElement elementary(std::size_t n, std::size_t i, std::size_t j, long long sign) {
    std::vector<BigInt> e(n * n, BigInt(0));
    for (std::size_t k = 0; k < n; ++k) e[k * n + k] = 1;
    e[i * n + j] = sign;
    return MatrixElement::from_entries(n, std::move(e));
}

/// {I} together with E_ij(+1), E_ij(-1) for all i != j.
inline std::vector<MatrixElement> elementary_generators(std::size_t n) {
    std::vector<MatrixElement> gens{MatrixElement::identity(n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            gens.push_back(elementary(n, i, j, 1));
            gens.push_back(elementary(n, i, j, -1));
        }
    }
    return gens;
}

inline MatrixElement sl2_s() { return MatrixElement::from_rows({{0, 1}, {-1, 0}}); }
inline MatrixElement sl2_t() { return MatrixElement::from_rows({{1, 1}, {0, 1}}); }

/// {I, S, S^-1, T, T^-1} with S = [[0,1],[-1,0]], T = [[1,1],[0,1]].
inline std::vector<MatrixElement> sl2_st_generators() {
    return {MatrixElement::identity(2), sl2_s(), inverse(sl2_s()), sl2_t(), inverse(sl2_t())};
}

/// {0, +e_i, -e_i : i < rank}.
inline std::vector<AbelianElement> lattice_generators(std::size_t rank) {
    std::vector<AbelianElement> gens{AbelianElement::identity(rank)};
    for (std::size_t i = 0; i < rank; ++i) {
        std::vector<BigInt> plus(rank, BigInt(0)), minus(rank, BigInt(0));
        plus[i] = 1;
        minus[i] = -1;
        gens.emplace_back(std::move(plus));
        gens.emplace_back(std::move(minus));
    }
    return gens;
}

}  // namespace thinwalk
