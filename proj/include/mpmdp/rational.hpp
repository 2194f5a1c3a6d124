#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mpmdp/errors.hpp"

namespace mpmdp {

/// Arbitrary-precision rational number.
///
/// Always kept in canonical form: gcd(numerator, denominator) = 1 and
/// denominator > 0. Every quantity on the decision path (probabilities,
/// rewards, thresholds, LP coefficients) is a Rational; floating point only
/// appears in simulation summaries and frontier weight-grid sizing.
class Rational {
public:
    Rational() : v_(0) {}
    Rational(int n) : v_(n) {}           // NOLINT(google-explicit-constructor)
    Rational(long n) : v_(static_cast<signed long>(n)) {} // NOLINT
    Rational(long long n) {                                // NOLINT
        if constexpr (sizeof(long) == sizeof(long long)) {
            v_ = mpq_class(static_cast<signed long>(n));
        } else {
            v_ = mpq_class(std::to_string(n), 10);
        }
    }
    Rational(long num, long den) {
        if (den == 0) throw ParseError("rational with zero denominator");
        v_ = mpq_class(num, den);
        v_.canonicalize();
    }
    explicit Rational(const mpq_class& q) : v_(q) { v_.canonicalize(); }

    /// Parses "p", "-p", or "p/q" with integer p, q and q != 0.
    /// Rejects floats, whitespace, and empty strings.
    static Rational parse(const std::string& text);

    /// "p" when the denominator is 1, otherwise "p/q".
    std::string str() const { return v_.get_str(); }

    double to_double() const { return v_.get_d(); }

    const mpq_class& raw() const { return v_; }
    mpz_class numerator() const { return v_.get_num(); }
    mpz_class denominator() const { return v_.get_den(); }

    int sign() const { return sgn(v_); }
    bool is_zero() const { return sgn(v_) == 0; }

    Rational abs() const { return Rational(mpq_class(::abs(v_))); }

    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.is_zero()) throw Error("rational division by zero");
        v_ /= o.v_;
        return *this;
    }

    friend Rational operator+(Rational a, const Rational& b) { a += b; return a; }
    friend Rational operator-(Rational a, const Rational& b) { a -= b; return a; }
    friend Rational operator*(Rational a, const Rational& b) { a *= b; return a; }
    friend Rational operator/(Rational a, const Rational& b) { a /= b; return a; }
    friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.v_)); }

    friend bool operator==(const Rational& a, const Rational& b) { return mpq_equal(a.v_.get_mpq_t(), b.v_.get_mpq_t()) != 0; }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) < 0; }
    friend bool operator<=(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) <= 0; }
    friend bool operator>(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) > 0; }
    friend bool operator>=(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) >= 0; }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r);

    /// Bit length of the larger of |numerator| and denominator; used by the
    /// solver's coefficient-growth statistics.
    int bit_length() const {
        size_t nb = mpz_sizeinbase(v_.get_num().get_mpz_t(), 2);
        size_t db = mpz_sizeinbase(v_.get_den().get_mpz_t(), 2);
        return static_cast<int>(nb > db ? nb : db);
    }

private:
    mpq_class v_;
};

inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }

/// Renders a vector as "(a, b, ...)" for error messages and reports.
std::string to_string(const std::vector<Rational>& v);

} // namespace mpmdp
