#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace smdp {

/// Resolves a requested worker count: n <= 0 means hardware concurrency.
int resolve_threads(int requested);

/// Runs fn(k) for k in [0, n) on up to `threads` workers. Each index is
/// processed exactly once; callers must write only to per-index slots so
/// results do not depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Pairwise (cascade) summation. Deterministic for a fixed input order and
/// more accurate than a running sum on long vectors.
double pairwise_sum(const std::vector<double>& xs);

} // namespace smdp
