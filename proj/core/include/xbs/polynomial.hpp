#pragma once
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xbs/number.hpp"

namespace xbs {

/// Dense-exponent sparse polynomial over the rationals in x1..xd.
class Polynomial {
  public:
    Polynomial() : dim_(0) {}
    explicit Polynomial(int dim) : dim_(dim) {}
    Polynomial(int dim, const Rational &c) : dim_(dim) {
        if (!c.is_zero())
            terms_.emplace(std::vector<int>(dim, 0), c);
    }
    static Polynomial variable(int dim, int i); // x_{i+1}

    int dim() const { return dim_; }
    bool is_zero() const { return terms_.empty(); }
    const std::map<std::vector<int>, Rational> &terms() const { return terms_; }

    Polynomial operator-() const;
    Polynomial &operator+=(const Polynomial &o);
    Polynomial &operator-=(const Polynomial &o);
    friend Polynomial operator+(Polynomial a, const Polynomial &b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial &b) { return a -= b; }
    friend Polynomial operator*(const Polynomial &a, const Polynomial &b);
    Polynomial scaled(const Rational &c) const;
    friend bool operator==(const Polynomial &a, const Polynomial &b) {
        return a.dim_ == b.dim_ && a.terms_ == b.terms_;
    }

    Polynomial derivative(int var) const;
    Rational eval(const std::vector<Rational> &x) const;
    double eval_double(const std::vector<double> &x) const;

    /// x -> p(M x + c), exact.
    Polynomial substitute_affine(const std::vector<std::vector<Rational>> &M,
                                 const std::vector<Rational> &c) const;

    int total_degree() const;

    /// Grammar: rational or decimal coefficients, x1..xd, + - * ^ and
    /// parentheses; "x1^2/2 + x1^4/4".
    static Polynomial parse(const std::string &text, int dim);
    std::string str() const;

  private:
    void insert(const std::vector<int> &m, const Rational &c);
    int dim_;
    std::map<std::vector<int>, Rational> terms_;
};

/// Exact polynomial data the oracles run on: drift (or potential), test
/// function, optionally a second drift or a skew matrix building f2 = J grad V.
struct PolySpec {
    int dim = 1;
    std::optional<Polynomial> potential;        // V; f = -grad V
    std::vector<Polynomial> f;                  // explicit drift if no potential
    Polynomial phi;                             // test function
    std::vector<Polynomial> f2;                 // white drift, optional
    std::optional<std::vector<std::vector<Rational>>> f2_skew; // J

    std::vector<Polynomial> drift() const;      // f or -grad V
    std::vector<Polynomial> white_drift() const; // f2 or J grad V
    bool has_white() const { return !f2.empty() || f2_skew.has_value(); }
    /// g = log density = -2V/sigma^2 up to a constant; needs the potential.
    Polynomial log_density_sq(const Rational &sigma_squared) const;
};

std::vector<std::vector<Rational>> matrix_inverse(std::vector<std::vector<Rational>> m);

/// Exactly orthogonal rational matrix (I-S)(I+S)^-1 from a skew S.
std::vector<std::vector<Rational>> cayley_orthogonal(const std::vector<std::vector<Rational>> &skew);

} // namespace xbs
