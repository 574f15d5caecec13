#pragma once

// Explicit sieve bounds: the pairwise Chebyshev bound, the polynomial sieve
// threshold n_min = 10|A| C^5 t^{5D} / alpha with bound 3/(alpha t), the plan
// t ~ n^{1/(5D)}, and the single-prime bound for proper closed sets.
// Everything is exact over the rationals; doubles appear only in reports.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"
#include "quotients.hpp"
#include "thinsets.hpp"

namespace thinwalk {

inline Rational clamp_unit(const Rational& x) {
    if (x < 0) return Rational(0);
    if (x > 1) return Rational(1);
    return x;
}

/// P(all A_i) <= (delta + beta/t) / beta^2.
inline Rational chebyshev_bound(const Rational& beta, const Rational& delta, std::uint64_t t) {
    if (beta <= 0 || beta > 1) throw DomainError("chebyshev bound needs 0 < beta <= 1");
    if (delta < 0) throw DomainError("chebyshev bound needs delta >= 0");
    if (t < 1) throw DomainError("chebyshev bound needs t >= 1");
    return (delta + beta / Rational(t)) / (beta * beta);
}

inline double chebyshev_bound(double beta, double delta, std::uint64_t t) {
    if (!(beta > 0)) throw DomainError("chebyshev bound needs 0 < beta <= 1");
    return to_double(chebyshev_bound(to_rational(beta), to_rational(delta), t));
}

struct SieveInputs {
    unsigned a_size = 1;
    Rational C = 1;
    unsigned D = 1;
    Rational alpha = Rational(1, 2);

    void validate() const {
        if (alpha <= 0 || alpha >= 1) throw DomainError("alpha must lie in (0,1), got " + rational_to_string(alpha));
        if (a_size < 1) throw DomainError("|A| must be positive");
        if (C <= 0) throw DomainError("growth constant C must be positive");
        if (D < 1) throw DomainError("growth exponent D must be positive");
    }

    nlohmann::json to_json() const {
        return {{"a_size", a_size}, {"C", rational_to_string(C)}, {"D", D}, {"alpha", rational_to_string(alpha)}};
    }
};

struct SieveBound {
    std::uint64_t t = 1;
    Rational n_min = 0;
    Rational bound = 1;        // clamped to [0,1]
    Rational raw_bound = 1;    // before clamping
    std::string regime = "polynomial";
    bool threshold_met = true;  // n >= n_min for plans
    SieveInputs inputs;

    nlohmann::json to_json() const {
        return {{"t", t},
                {"n_min", rational_to_string(n_min)},
                {"n_min_approx", to_double(n_min)},
                {"bound", rational_to_string(bound)},
                {"bound_approx", to_double(bound)},
                {"regime", regime},
                {"threshold_met", threshold_met},
                {"inputs", inputs.to_json()}};
    }
};

/// 10 |A| C^5 t^{5D} / alpha.
inline Rational sieve_threshold(const SieveInputs& in, std::uint64_t t) {
    return Rational(10 * in.a_size) * rpow(in.C, 5) * Rational(ipow(BigInt(t), 5 * in.D)) / in.alpha;
}

inline SieveBound sieve_threshold_and_bound(const SieveInputs& in, std::uint64_t t) {
    in.validate();
    if (t < 1) throw DomainError("t must be at least 1");
    SieveBound b;
    b.t = t;
    b.inputs = in;
    b.n_min = sieve_threshold(in, t);
    b.raw_bound = Rational(3) / (in.alpha * Rational(t));
    b.bound = clamp_unit(b.raw_bound);
    return b;
}

/// Largest t >= 1 with n >= n_min(t). If even t = 1 misses the threshold the
/// bound is the trivial 1 and threshold_met is false.
inline SieveBound plan_for_n(const BigInt& n, const SieveInputs& in) {
    in.validate();
    if (n < 1) throw DomainError("plan needs n >= 1");
    const Rational scale = Rational(in.alpha * Rational(n)) / (Rational(10 * in.a_size) * rpow(in.C, 5));
    auto fits = [&](std::uint64_t t) { return Rational(ipow(BigInt(t), 5 * in.D)) <= scale; };
    SieveBound b = sieve_threshold_and_bound(in, 1);
    if (!fits(1)) {
        b.threshold_met = false;
        b.bound = 1;
        b.raw_bound = 1;
        return b;
    }
    const double guess = std::pow(std::max(to_double(scale), 1.0), 1.0 / (5.0 * in.D));
    std::uint64_t t = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(guess));
    while (t > 1 && !fits(t)) --t;
    while (fits(t + 1)) ++t;
    return sieve_threshold_and_bound(in, t);
}

/// K^{5D} with plan bound <= K n^{-1/(5D)} for every n >= 1:
/// K^{5D} = (6/alpha)^{5D} * 10 |A| C^5 / alpha.
inline Rational plan_rate_constant_power(const SieveInputs& in) {
    in.validate();
    return rpow(Rational(6) / in.alpha, 5 * in.D) * Rational(10 * in.a_size) * rpow(in.C, 5) / in.alpha;
}

/// bound <= K n^{-1/(5D)}, decided exactly as bound^{5D} * n <= K^{5D}.
inline bool plan_rate_holds(const BigInt& n, const SieveBound& b) {
    return rpow(b.bound, 5 * b.inputs.D) * Rational(n) <= plan_rate_constant_power(b.inputs);
}

// ---------------------------------------------------------------------------
// Single prime: P(w_n in Z) <= density + density * order * order^{1/2} * base^n.

inline double single_prime_bound(const BigInt& order, double density, unsigned a_size, std::uint64_t n,
                                 std::optional<double> pi_star = std::nullopt) {
    if (density < 0 || density > 1) throw DomainError("residual density must lie in [0,1]");
    if (order < 1 || a_size < 1) throw DomainError("single-prime bound needs order >= 1 and |A| >= 1");
    if (density == 0) return 0.0;
    const double g = order.convert_to<double>();
    const double base = pi_star ? *pi_star : 1.0 - 1.0 / (static_cast<double>(a_size) * g * g);
    if (base < 0 || base > 1) throw DomainError("pi_* outside [0,1]");
    const double log_tail = std::log(density) + 1.5 * std::log(g) + static_cast<double>(n) * std::log(base);
    const double tail = base == 0 ? 0.0 : std::exp(log_tail);
    const double v = density + std::nextafter(tail * (1.0 + 1e-12), INFINITY);
    return std::clamp(v, 0.0, 1.0);
}

/// Exact upper evaluation with the square root of the order rounded up.
inline Rational single_prime_bound_exact(const BigInt& order, const Rational& density, std::uint64_t n,
                                         const Rational& base) {
    if (density < 0 || density > 1) throw DomainError("residual density must lie in [0,1]");
    if (base < 0 || base > 1) throw DomainError("base outside [0,1]");
    if (density == 0) return Rational(0);
    BigInt root = isqrt(order);
    if (root * root != order) ++root;
    return clamp_unit(density + density * Rational(order) * Rational(root) * rpow(base, static_cast<unsigned>(n)));
}

// ---------------------------------------------------------------------------
// Exponential template e^{-n/C2} with C2 = -1/log(1 - eps).

struct ExponentialTemplate {
    double epsilon = 0.0;
    double c2 = INFINITY;

    static ExponentialTemplate from_epsilon(double eps) {
        if (!(eps > 0 && eps < 1)) throw DomainError("expander margin must lie in (0,1)");
        return {eps, -1.0 / std::log1p(-eps)};
    }
    double bound(std::uint64_t n) const { return std::clamp(std::exp(-static_cast<double>(n) / c2), 0.0, 1.0); }
};

// ---------------------------------------------------------------------------
// Sieve margin alpha from measured residual densities.

struct AlphaEstimate {
    double alpha = 0.0;        // 1 - max(density + half_width)
    Rational alpha_exact = 0;  // set when every prime was enumerated
    bool exact = false;
    std::vector<ResidualResult> per_prime;

    nlohmann::json to_json() const {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : per_prime) rows.push_back(r.to_json());
        nlohmann::json j{{"alpha", alpha}, {"per_prime", rows}};
        if (exact) j["alpha_exact"] = rational_to_string(alpha_exact);
        return j;
    }
};

template <class Quotient, class ThinSet>
AlphaEstimate estimate_alpha(const ThinSet& oracle, const std::vector<Quotient>& quotients, ResidualMode mode,
                             std::size_t budget = kDefaultEnumerationBudget, std::uint64_t samples = 100'000,
                             std::uint64_t seed = 1) {
    if (quotients.empty()) throw ConfigError("alpha estimation needs at least one prime");
    AlphaEstimate a;
    a.exact = mode == ResidualMode::Enumerate;
    Rational worst = 0;
    double worst_d = 0.0;
    for (const auto& q : quotients) {
        a.per_prime.push_back(residual(oracle, q, mode, budget, samples, seed));
        const auto& r = a.per_prime.back();
        worst_d = std::max(worst_d, std::min(1.0, r.density + r.half_width));
        if (a.exact) worst = std::max(worst, Rational(BigInt(r.count), BigInt(r.examined)));
    }
    a.alpha = 1.0 - worst_d;
    if (a.exact) {
        a.alpha_exact = 1 - worst;
        a.alpha = to_double(a.alpha_exact);
    }
    return a;
}

inline std::vector<SlModPrime> sl_quotients(unsigned n, const std::vector<u64>& primes) {
    std::vector<SlModPrime> qs;
    for (u64 p : primes) qs.emplace_back(n, p);
    return qs;
}

/// n, t, n_min, bound, regime
inline std::string sieve_table_header() { return "n,t,n_min,bound,regime"; }

inline std::string sieve_table_row(const BigInt& n, const SieveBound& b) {
    char buf[128];
    std::snprintf(buf, sizeof buf, ",%llu,%.6g,%.6g,%s", static_cast<unsigned long long>(b.t), to_double(b.n_min),
                  to_double(b.bound), b.regime.c_str());
    return n.str() + buf;
}

}  // namespace thinwalk
