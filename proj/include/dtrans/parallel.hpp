#pragma once

#include <cstddef>
#include <functional>

namespace dtrans {

/// Worker cap: DTRANS_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, count). Each index must write only its own
/// output slot; callers reduce afterwards in index order, which keeps
/// results independent of the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace dtrans
