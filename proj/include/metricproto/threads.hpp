#pragma once

#include <cstddef>
#include <functional>

namespace metricproto {

/// Worker count: METRIC_PROTO_THREADS if set (clamped to >= 1), otherwise the
/// number of available cores.
std::size_t thread_count();

/// Runs fn(i) for i in [0, n) on a transient pool. Tasks write into
/// preallocated slots keyed by i, so results are independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace metricproto
