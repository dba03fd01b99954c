#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nondim {

// Exact rational over arbitrary-precision integers. GMP keeps mpq_class in
// canonical form (gcd 1, positive denominator) after every arithmetic op.
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_rational(long num, long den = 1) {
    if (den == 0)
        throw std::invalid_argument("make_rational: zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline Rational parse_rational(const std::string &text) {
    Rational q;
    if (q.set_str(text, 10) != 0)
        throw std::invalid_argument("not a rational literal: " + text);
    if (q.get_den() == 0)
        throw std::invalid_argument("zero denominator: " + text);
    q.canonicalize();
    return q;
}

inline std::string to_string(const Rational &q) { return q.get_str(); }
inline std::string to_string(const Integer &z) { return z.get_str(); }

inline bool is_integer(const Rational &q) { return q.get_den() == 1; }

inline Rational pow(const Rational &base, long exponent) {
    if (exponent < 0) {
        if (base == 0)
            throw std::domain_error("pow: zero to a negative power");
        Rational inv = 1 / base;
        return pow(inv, -exponent);
    }
    Integer num, den;
    mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(exponent));
    mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(exponent));
    Rational r(num, den);
    r.canonicalize();
    return r;
}

// Exact k-th root, if it exists in Q.
inline std::optional<Rational> exact_root(const Rational &q, unsigned long k) {
    if (k == 0)
        return std::nullopt;
    if (k == 1)
        return q;
    if (q < 0 && k % 2 == 0)
        return std::nullopt;
    Integer num, den;
    if (mpz_root(num.get_mpz_t(), q.get_num_mpz_t(), k) == 0)
        return std::nullopt;
    if (mpz_root(den.get_mpz_t(), q.get_den_mpz_t(), k) == 0)
        return std::nullopt;
    Rational r(num, den);
    r.canonicalize();
    return r;
}

// base^(p/q) when the result is rational.
inline std::optional<Rational> rational_power(const Rational &base, const Rational &exponent) {
    if (base == 0) {
        if (exponent > 0)
            return Rational(0);
        return std::nullopt;
    }
    if (!exponent.get_den().fits_ulong_p() || !exponent.get_num().fits_slong_p())
        return std::nullopt;
    auto root = exact_root(base, exponent.get_den().get_ui());
    if (!root)
        return std::nullopt;
    return pow(*root, exponent.get_num().get_si());
}

inline Integer gcd(const Integer &a, const Integer &b) {
    Integer g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

inline Integer lcm(const Integer &a, const Integer &b) {
    Integer l;
    mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return l;
}

// Nearest integer, ties rounded up (floor(q + 1/2)).
inline Integer round_nearest(const Rational &q) {
    Rational shifted = q + Rational(1, 2);
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
    return r;
}

// Scales a rational vector to a primitive integer vector (gcd 1) whose first
// nonzero entry is positive. The zero vector is returned unchanged.
inline std::vector<Rational> primitive_integer(std::vector<Rational> v) {
    Integer den = 1;
    for (const auto &x : v)
        den = lcm(den, x.get_den());
    Integer g = 0;
    for (auto &x : v) {
        x *= den;
        g = gcd(g, x.get_num());
    }
    if (g == 0)
        return v;
    int sign = 0;
    for (const auto &x : v) {
        if (x != 0) {
            sign = x > 0 ? 1 : -1;
            break;
        }
    }
    for (auto &x : v)
        x = Rational(x.get_num() / g * sign);
    return v;
}

} // namespace nondim
