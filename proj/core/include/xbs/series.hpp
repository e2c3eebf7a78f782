#pragma once
#include <limits>
#include <map>

#include "xbs/coefficient.hpp"
#include "xbs/forest.hpp"

namespace xbs {

/// Finite graded map from canonical forests to coefficients, truncated at a
/// doubled-grade cutoff. Two series are equal iff their term maps are equal.
class Series {
  public:
    static constexpr int unbounded = std::numeric_limits<int>::max();

    explicit Series(int cutoff2 = unbounded) : cutoff2_(cutoff2) {}

    static Series term(const Forest &f, Coefficient c = Coefficient(1),
                       int cutoff2 = unbounded);

    int cutoff2() const { return cutoff2_; }
    const std::map<Forest, Coefficient, ForestLess> &terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    size_t size() const { return terms_.size(); }

    /// Canonicalizes, drops zero coefficients and over-cutoff grades.
    void add(const Forest &f, const Coefficient &c);

    Series &operator+=(const Series &o);
    Series &operator-=(const Series &o);
    friend Series operator+(Series a, const Series &b) { return a += b; }
    friend Series operator-(Series a, const Series &b) { return a -= b; }
    Series scaled(const Coefficient &c) const;
    Series truncated(int cutoff2) const;
    Series graded_part(int grade2_value) const;

    Coefficient coefficient_of(const Forest &f) const;

    friend bool operator==(const Series &a, const Series &b) { return a.terms_ == b.terms_; }

    bool near_zero(double tol) const;
    std::string str() const;

  private:
    int cutoff2_;
    std::map<Forest, Coefficient, ForestLess> terms_;
};

} // namespace xbs
