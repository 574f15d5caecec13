#pragma once

// Spectra of normalized adjacency operators of finite Cayley graphs and the
// walk-to-uniform deviation bound |P(w_n = g) - 1/|G|| <= |G|^{1/2} pi_*^n.

#include <Eigen/Dense>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"
#include "quotients.hpp"
#include "rng.hpp"

namespace thinwalk {

struct AdjacencySpectrum {
    std::string modulus;
    std::size_t order = 0;
    unsigned a_size = 0;
    double pi_1 = 0.0;    // second largest eigenvalue
    double pi_min = 0.0;  // smallest eigenvalue
    double pi_star = 0.0;
    std::string method;   // "dense" or "iterative"
    double residual = 0.0;

    /// pi_* rounded up by the residual, for use inside upper bounds.
    double pi_star_upper() const {
        const double up = std::nextafter(pi_star + residual, 2.0);
        return std::clamp(up, 0.0, 1.0);
    }
    double pi_1_upper() const { return std::nextafter(pi_1 + residual, 2.0); }

    static std::string csv_header() { return "modulus,order,a_size,pi_1,pi_min,pi_star,method,residual"; }
    std::string csv_row() const {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%zu,%u,%.15g,%.15g,%.15g,%s,%.3g", modulus.c_str(), order, a_size, pi_1,
                      pi_min, pi_star, method.c_str(), residual);
        return buf;
    }
};

struct SpectrumOptions {
    std::size_t dense_threshold = 4000;
    double tolerance = 1e-9;
    std::size_t max_krylov = 3000;
    std::uint64_t seed = 0x5eed;
};

/// Dense transition matrix P(i, i*a) += w_a / |A|.
inline Eigen::MatrixXd transition_matrix(const CayleyTable& t) {
    const auto n = static_cast<Eigen::Index>(t.order());
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < t.order(); ++i) {
        for (std::size_t a = 0; a < t.generator_count(); ++a) {
            p(static_cast<Eigen::Index>(i), t.step(i, a)) += static_cast<double>(t.weights[a]) / t.a_size;
        }
    }
    return p;
}

inline void apply_transition(const CayleyTable& t, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    y.setZero(x.size());
    const double inv = 1.0 / t.a_size;
    for (std::size_t i = 0; i < t.order(); ++i) {
        double acc = 0.0;
        for (std::size_t a = 0; a < t.generator_count(); ++a) acc += t.weights[a] * x[t.step(i, a)];
        y[static_cast<Eigen::Index>(i)] = acc * inv;
    }
}

namespace detail {

inline AdjacencySpectrum dense_spectrum(const CayleyTable& t) {
    const Eigen::MatrixXd p = transition_matrix(t);
    if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ConfigError("transition operator is not symmetric");
    AdjacencySpectrum s;
    s.method = "dense";
    const auto n = p.rows();
    if (n == 1) {
        s.pi_1 = s.pi_min = 1.0;
        s.pi_star = 0.0;
        return s;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(p, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw ConvergenceFailure("dense eigensolver failed on " + t.label);
    const auto& ev = solver.eigenvalues();  // ascending
    s.pi_min = ev[0];
    s.pi_1 = ev[n - 2];
    s.pi_star = std::max(s.pi_1, std::abs(s.pi_min));
    const auto& v = solver.eigenvectors();
    const double r1 = (p * v.col(n - 2) - ev[n - 2] * v.col(n - 2)).norm();
    const double r0 = (p * v.col(0) - ev[0] * v.col(0)).norm();
    s.residual = std::max(r0, r1);
    return s;
}

/// Lanczos with full reorthogonalization on the complement of the constant vector.
/// Both extreme Ritz pairs must reach the residual tolerance explicitly.
inline AdjacencySpectrum iterative_spectrum(const CayleyTable& t, const SpectrumOptions& opt) {
    const auto n = static_cast<Eigen::Index>(t.order());
    const Eigen::VectorXd ones = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    auto deflate = [&](Eigen::VectorXd& x) { x -= ones.dot(x) * ones; };

    const CounterRng rng(opt.seed);
    Eigen::VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i) q[i] = rng.unit(0, static_cast<std::uint64_t>(i)) - 0.5;
    deflate(q);
    q.normalize();

    const std::size_t cap = std::min<std::size_t>(opt.max_krylov, static_cast<std::size_t>(n - 1));
    std::vector<Eigen::VectorXd> basis{q};
    std::vector<double> alpha, beta;
    Eigen::VectorXd w(n);
    AdjacencySpectrum best;
    best.method = "iterative";
    best.residual = INFINITY;

    auto ritz_check = [&](bool force) -> bool {
        const auto k = static_cast<Eigen::Index>(alpha.size());
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            tri(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < k) tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        const double b_last = beta.size() >= alpha.size() ? beta.back() : 0.0;
        const double est_hi = std::abs(b_last * es.eigenvectors()(k - 1, k - 1));
        const double est_lo = std::abs(b_last * es.eigenvectors()(k - 1, 0));
        if (!force && std::max(est_hi, est_lo) > opt.tolerance * 0.1) return false;
        double residual = 0.0;
        double values[2] = {es.eigenvalues()[k - 1], es.eigenvalues()[0]};
        Eigen::Index cols[2] = {k - 1, 0};
        for (int c = 0; c < 2; ++c) {
            Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
            for (Eigen::Index j = 0; j < k; ++j) y += es.eigenvectors()(j, cols[c]) * basis[static_cast<std::size_t>(j)];
            y.normalize();
            Eigen::VectorXd py;
            apply_transition(t, y, py);
            residual = std::max(residual, (py - values[c] * y).norm());
        }
        if (residual < best.residual) {
            best.pi_1 = values[0];
            best.pi_min = values[1];
            best.residual = residual;
        }
        return residual <= opt.tolerance;
    };

    bool converged = false;
    for (std::size_t j = 0; j < cap; ++j) {
        apply_transition(t, basis[j], w);
        const double a = basis[j].dot(w);
        alpha.push_back(a);
        deflate(w);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) w -= b.dot(w) * b;
        }
        const double b = w.norm();
        beta.push_back(b);
        const bool exhausted = b < 1e-13 || j + 1 == cap;
        if ((j + 1) % 10 == 0 || exhausted) {
            if (ritz_check(exhausted)) {
                converged = true;
                break;
            }
        }
        if (exhausted) break;
        basis.push_back(w / b);
    }
    if (!converged) {
        throw ConvergenceFailure("Lanczos on " + t.label + " stopped with residual " + std::to_string(best.residual) +
                                 " above tolerance");
    }
    best.pi_star = std::max(best.pi_1, std::abs(best.pi_min));
    return best;
}

}  // namespace detail

/// Second and smallest eigenvalues of the walk operator on a finite Cayley graph.
inline AdjacencySpectrum second_eigenvalue(const CayleyTable& table, const SpectrumOptions& opt = {}) {
    if (table.order() == 0) throw ConfigError("EnumerationUnavailable: empty Cayley table");
    AdjacencySpectrum s = table.order() <= opt.dense_threshold ? detail::dense_spectrum(table)
                                                                : detail::iterative_spectrum(table, opt);
    s.modulus = table.label;
    s.order = table.order();
    s.a_size = table.a_size;
    s.pi_1 = std::clamp(s.pi_1, -1.0, 1.0);
    s.pi_min = std::clamp(s.pi_min, -1.0, 1.0);
    s.pi_star = std::clamp(std::max(s.pi_1, std::abs(s.pi_min)), 0.0, 1.0);
    if (s.residual > opt.tolerance) {
        throw ConvergenceFailure("spectrum of " + table.label + " has residual " + std::to_string(s.residual));
    }
    return s;
}

template <FiniteGroup G>
AdjacencySpectrum second_eigenvalue(const G& group, const GeneratorMultiset<typename G::source_type>& gens,
                                    const SpectrumOptions& opt = {}, std::size_t budget = 1'000'000) {
    return second_eigenvalue(build_cayley_table(group, gens, budget), opt);
}

/// Universal gap: pi_* <= 1 - 1/(|A| |G|^2).
inline Rational universal_pi_star(const BigInt& order, unsigned a_size) {
    return Rational(1) - Rational(BigInt(1), BigInt(a_size) * order * order);
}

/// |G|^{1/2} * base^n with base = pi_* or the universal gap, rounded upward.
inline double mixing_bound(const BigInt& order, unsigned a_size, std::uint64_t n,
                           std::optional<double> pi_star = std::nullopt) {
    if (order < 1 || a_size < 1) throw ConfigError("mixing bound needs order >= 1 and |A| >= 1");
    const long double g = order.convert_to<long double>();
    const long double base = pi_star ? static_cast<long double>(*pi_star)
                                     : 1.0L - 1.0L / (static_cast<long double>(a_size) * g * g);
    if (base < 0 || base > 1) throw DomainError("pi_* outside [0,1]");
    const long double value = std::sqrt(g) * std::pow(base, static_cast<long double>(n));
    const long double slack = 1.0L + 8.0L * (static_cast<long double>(n) + 4.0L) * LDBL_EPSILON;
    return std::nextafter(static_cast<double>(value * slack), INFINITY);
}

/// The square of the bound, exactly: |G| * base^{2n}.
inline Rational mixing_bound_squared(const BigInt& order, unsigned a_size, std::uint64_t n,
                                     std::optional<Rational> pi_star = std::nullopt) {
    const Rational base = pi_star ? *pi_star : universal_pi_star(order, a_size);
    return Rational(order) * rpow(base, static_cast<unsigned>(2 * n));
}

/// max_g |P(w_n = g) - 1/|G|| from exact path counts, as an exact rational.
inline Rational max_uniform_deviation(const std::vector<BigInt>& counts, unsigned a_size, std::uint64_t n) {
    const BigInt total = ipow(BigInt(a_size), static_cast<unsigned>(n));
    const BigInt g = counts.size();
    BigInt worst = 0;
    for (const auto& c : counts) {
        BigInt d = boost::multiprecision::abs(c * g - total);
        if (d > worst) worst = d;
    }
    return Rational(worst, g * total);
}

struct ExpanderReport {
    bool ok = true;
    double epsilon = 0.0;
    std::vector<std::string> violators;
};

/// One-sided certification: pi_1 <= 1 - epsilon on every listed quotient (pi_1 rounded up).
inline ExpanderReport expander_certify(const std::vector<AdjacencySpectrum>& spectra, double epsilon) {
    if (spectra.empty()) throw ConfigError("expander certification needs at least one spectrum");
    ExpanderReport r;
    r.epsilon = epsilon;
    for (const auto& s : spectra) {
        if (s.pi_1_upper() > 1.0 - epsilon) {
            r.ok = false;
            r.violators.push_back(s.modulus);
        }
    }
    return r;
}

}  // namespace thinwalk
