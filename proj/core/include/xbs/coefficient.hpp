#pragma once
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "xbs/number.hpp"

namespace xbs {

/// Process-wide interning table for polynomial generators. Id 0 is the noise
/// symbol "sigma", the only generator that may carry negative exponents.
class Generators {
  public:
    static Generators &instance();

    int intern(const std::string &name);
    int intern(const std::string &name, const std::string &pretty, const std::string &latex);
    const std::string &name(int id) const;
    const std::string &pretty(int id) const;
    const std::string &latex(int id) const;
    int sigma() const { return 0; }
    int lookup(const std::string &name) const; // -1 when absent

  private:
    Generators();
    mutable std::mutex mu_;
    struct Entry {
        std::string name, pretty, latex;
    };
    std::vector<Entry> entries_;
    std::map<std::string, int> index_;
};

/// Exponent vector, sorted by generator id, exponents nonzero.
using Monomial = std::vector<std::pair<int, int>>;

/// Sparse multivariate polynomial over Number in the interned generators.
/// Exact whenever all inputs are exact.
class Coefficient {
  public:
    Coefficient() = default;
    Coefficient(Number n) {
        if (!n.is_zero())
            terms_.emplace(Monomial{}, std::move(n));
    }
    Coefficient(int n) : Coefficient(Number(n)) {}
    Coefficient(const Rational &q) : Coefficient(Number(q)) {}

    static Coefficient generator(int id, int exponent = 1);
    static Coefficient generator(const std::string &name, int exponent = 1);
    static Coefficient sigma_power(int exponent);

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    Number constant_value() const; // 0 when empty; throws if non-constant
    bool exact() const;

    const std::map<Monomial, Number> &terms() const { return terms_; }

    Coefficient operator-() const;
    Coefficient &operator+=(const Coefficient &o);
    Coefficient &operator-=(const Coefficient &o);
    friend Coefficient operator+(Coefficient a, const Coefficient &b) { return a += b; }
    friend Coefficient operator-(Coefficient a, const Coefficient &b) { return a -= b; }
    friend Coefficient operator*(const Coefficient &a, const Coefficient &b);
    Coefficient &operator*=(const Coefficient &o) { return *this = *this * o; }

    friend bool operator==(const Coefficient &a, const Coefficient &b) {
        return a.terms_ == b.terms_;
    }
    friend bool operator!=(const Coefficient &a, const Coefficient &b) { return !(a == b); }
    friend bool operator<(const Coefficient &a, const Coefficient &b) {
        return a.terms_ < b.terms_;
    }

    /// Substitute generators by values (symbolic tableau -> numeric scheme,
    /// consistency folding). Unmapped generators stay.
    Coefficient substitute(const std::map<int, Coefficient> &assignment) const;

    /// Division by a single-term coefficient (used by the reducer's pivots).
    Coefficient divided_by_monomial(const Coefficient &m) const;

    /// Largest k with sigma^-k appearing; 0 when no negative sigma powers.
    int sigma_clearing_power() const;

    bool near_zero(double tol) const;

    /// Grammar: rational constants, '*', '/', '^' with integer exponents,
    /// '+', '-', generators as identifiers. "1/2*sigma^2 + theta".
    static Coefficient parse(const std::string &text);

    std::string str() const;                    // round-trips through parse
    std::string pretty(bool latex = false) const; // display names

  private:
    void insert(const Monomial &m, const Number &n);
    std::map<Monomial, Number> terms_;
};

inline Coefficient sigma2() { return Coefficient::sigma_power(2); }

} // namespace xbs
