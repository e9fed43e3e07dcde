#pragma once

#include <span>

namespace treeclust {

/// Pair-counting Adjusted Rand Index. Returns 1 when both partitions are
/// trivial in the same way (zero denominator).
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Mutual information over sqrt(H(a) H(b)). When an entropy is zero the
/// score is 1 for identical partitions and 0 otherwise.
double normalized_mutual_info(std::span<const int> a, std::span<const int> b);

}  // namespace treeclust
