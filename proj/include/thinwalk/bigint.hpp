#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace thinwalk {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt parse_bigint(std::string_view text) {
    std::size_t i = 0;
    if (!text.empty() && (text[0] == '-' || text[0] == '+')) i = 1;
    if (i == text.size()) throw ConfigError("not a decimal integer: '" + std::string(text) + "'");
    for (std::size_t j = i; j < text.size(); ++j) {
        if (text[j] < '0' || text[j] > '9') {
            throw ConfigError("not a decimal integer: '" + std::string(text) + "'");
        }
    }
    return BigInt(std::string(text[0] == '+' ? text.substr(1) : text));
}

inline std::string to_decimal(const BigInt& x) { return x.str(); }

/// Floor square root of a non-negative integer.
inline BigInt isqrt(const BigInt& x) {
    if (x < 0) throw DomainError("isqrt of negative integer");
    return boost::multiprecision::sqrt(x);
}

/// Exact perfect-square test: integer square root followed by exact squaring.
inline std::optional<BigInt> exact_sqrt(const BigInt& x) {
    if (x < 0) return std::nullopt;
    BigInt r = isqrt(x);
    if (r * r == x) return r;
    return std::nullopt;
}

inline bool is_perfect_square(const BigInt& x) { return exact_sqrt(x).has_value(); }

/// Natural log of |x| for x != 0, valid far beyond the double range.
inline double log_abs(const BigInt& x) {
    BigInt a = boost::multiprecision::abs(x);
    if (a == 0) return -std::numeric_limits<double>::infinity();
    const unsigned bits = boost::multiprecision::msb(a) + 1;
    if (bits <= 1000) return std::log(a.convert_to<double>());
    const unsigned shift = bits - 64;
    BigInt top = a >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

inline double log_ratio(const BigInt& num, const BigInt& den) { return log_abs(num) - log_abs(den); }

inline double to_double(const Rational& q) {
    const BigInt& num = boost::multiprecision::numerator(q);
    const BigInt& den = boost::multiprecision::denominator(q);
    if (num == 0) return 0.0;
    const double lg = log_ratio(num, den);
    if (lg > -700.0 && lg < 700.0) return q.convert_to<double>();
    const double mag = std::exp(lg);
    return num < 0 ? -mag : mag;
}

/// Exact rational from a finite double.
inline Rational to_rational(double x) {
    if (!std::isfinite(x)) throw DomainError("non-finite value has no rational form");
    int exp = 0;
    const double mant = std::frexp(x, &exp);
    // 53 significant bits
    const auto scaled = static_cast<long long>(std::ldexp(mant, 53));
    Rational r{BigInt(scaled)};
    exp -= 53;
    BigInt pow2 = BigInt(1) << std::abs(exp);
    if (exp >= 0) return r * Rational(pow2);
    return r / Rational(pow2);
}

inline BigInt ipow(BigInt base, unsigned exponent) { return boost::multiprecision::pow(base, exponent); }

inline Rational rpow(const Rational& base, unsigned exponent) {
    Rational result = 1;
    Rational b = base;
    while (exponent > 0) {
        if (exponent & 1U) result *= b;
        exponent >>= 1U;
        if (exponent > 0) b *= b;
    }
    return result;
}

/// Non-negative residue of x modulo m.
inline std::uint64_t mod_u64(const BigInt& x, std::uint64_t m) {
    BigInt r = x % m;
    if (r < 0) r += m;
    return r.convert_to<std::uint64_t>();
}

/// Parses "a/b", "a", or a decimal like "0.5" into an exact rational.
inline Rational parse_rational(std::string_view text) {
    const auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        BigInt den = parse_bigint(text.substr(slash + 1));
        if (den == 0) throw ConfigError("zero denominator in '" + std::string(text) + "'");
        return Rational(parse_bigint(text.substr(0, slash)), den);
    }
    const auto dot = text.find('.');
    if (dot == std::string_view::npos) return Rational(parse_bigint(text));
    std::string digits(text.substr(0, dot));
    std::string frac(text.substr(dot + 1));
    if (digits.empty() || digits == "-" || digits == "+") digits += "0";
    for (char c : frac) {
        if (c < '0' || c > '9') throw ConfigError("not a decimal number: '" + std::string(text) + "'");
    }
    const bool neg = !digits.empty() && digits[0] == '-';
    BigInt whole = parse_bigint(digits);
    BigInt scale = ipow(BigInt(10), static_cast<unsigned>(frac.size()));
    BigInt f = frac.empty() ? BigInt(0) : parse_bigint(frac);
    BigInt num = boost::multiprecision::abs(whole) * scale + f;
    return Rational(neg ? BigInt(-num) : num, scale);
}

inline std::string rational_to_string(const Rational& q) {
    const BigInt& den = boost::multiprecision::denominator(q);
    if (den == 1) return boost::multiprecision::numerator(q).str();
    return boost::multiprecision::numerator(q).str() + "/" + den.str();
}

}  // namespace thinwalk
