#pragma once
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <string>

#include "xbs/errors.hpp"

namespace xbs {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Exact rational scalar with an inexact (double) escape hatch.
///
/// Schemes with irrational tableau entries run in double mode; inexactness is
/// contagious: any operation touching an inexact Number yields an inexact one.
class Number {
  public:
    Number() : exact_(true), q_(0) {}
    Number(int v) : exact_(true), q_(v) {}
    Number(long long v) : exact_(true), q_(v) {}
    Number(Rational q) : exact_(true), q_(std::move(q)) {}
    static Number inexact(double d) {
        Number n;
        n.exact_ = false;
        n.d_ = d;
        return n;
    }

    bool exact() const { return exact_; }
    const Rational &rational() const {
        if (!exact_)
            throw ArithmeticModeMismatch("exact value requested from inexact Number");
        return q_;
    }
    double to_double() const { return exact_ ? static_cast<double>(q_) : d_; }

    bool is_zero() const { return exact_ ? q_.is_zero() : d_ == 0.0; }

    Number operator-() const {
        return exact_ ? Number(Rational(-q_)) : inexact(-d_);
    }
    friend Number operator+(const Number &a, const Number &b) {
        if (a.exact_ && b.exact_)
            return Number(Rational(a.q_ + b.q_));
        return inexact(a.to_double() + b.to_double());
    }
    friend Number operator-(const Number &a, const Number &b) { return a + (-b); }
    friend Number operator*(const Number &a, const Number &b) {
        if (a.exact_ && b.exact_)
            return Number(Rational(a.q_ * b.q_));
        return inexact(a.to_double() * b.to_double());
    }
    friend Number operator/(const Number &a, const Number &b) {
        if (b.is_zero())
            throw Error("Number: division by zero");
        if (a.exact_ && b.exact_)
            return Number(Rational(a.q_ / b.q_));
        return inexact(a.to_double() / b.to_double());
    }
    Number &operator+=(const Number &b) { return *this = *this + b; }
    Number &operator-=(const Number &b) { return *this = *this - b; }
    Number &operator*=(const Number &b) { return *this = *this * b; }

    /// Exact equality; inexact values compare by their doubles.
    friend bool operator==(const Number &a, const Number &b) {
        if (a.exact_ && b.exact_)
            return a.q_ == b.q_;
        return a.to_double() == b.to_double();
    }
    friend bool operator!=(const Number &a, const Number &b) { return !(a == b); }
    friend bool operator<(const Number &a, const Number &b) {
        if (a.exact_ && b.exact_)
            return a.q_ < b.q_;
        return a.to_double() < b.to_double();
    }

    bool near_zero(double tol) const {
        return exact_ ? q_.is_zero() : std::abs(d_) <= tol;
    }

    std::string str() const;

  private:
    bool exact_;
    Rational q_;
    double d_ = 0.0;
};

Rational rational_from_string(const std::string &s);

/// Parses "3", "-1/2" or "0.25"; a '.' or 'e' exponent makes it inexact.
Number number_from_string(const std::string &s);

} // namespace xbs
