#pragma once

#include <functional>

namespace mf {

/// Worker count from MF_THREADS (0 or unset = hardware concurrency).
int worker_count();

/**
 * Runs body(begin, end) over disjoint chunks of [0, n).
 *
 * Each chunk writes only its own rows, so results do not depend on the
 * number of workers or their scheduling.
 */
void parallel_for(int n, const std::function<void(int, int)>& body);

} // namespace mf
