#pragma once
#include "xbs/series.hpp"

namespace xbs {

/// Perfect matchings of {0..2n-1}.
std::vector<std::vector<std::pair<int, int>>> pair_partitions(int two_n);

/// Gaussian expectation of a series over grafted forests: per noise channel,
/// an odd number of grafted nodes kills the forest; otherwise each perfect
/// matching replaces a pair of grafted nodes by one liana between their
/// parents. Channels never mix.
Series expectation(const Series &s);

/// Composition of differential operators at the root: every edge and every
/// liana endpoint attached to the outer root is reattached, independently, to
/// each node of the inner forest (Leibniz rule), and the inner root takes over.
Series compose(const Series &outer, const Series &inner);

/// Generator of the dynamics: phi'f + (sigma^2/2) Lap phi, plus phi'f2 when
/// partitioned.
Series generator(bool partitioned = false);

Series generator_power(int k, int cutoff2, bool partitioned = false);

/// compose(a, b) - compose(b, a).
Series lie_bracket(const Series &a, const Series &b);

} // namespace xbs
