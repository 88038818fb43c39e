#ifndef AMS_PARALLEL_HPP
#define AMS_PARALLEL_HPP

#include <cstdint>
#include <functional>

namespace ams {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Tasks must be
// independent and write only to their own slots; scheduling order is
// unspecified, so determinism has to come from the task indexing itself.
void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn);

// Resolves a requested worker count: 0 means hardware concurrency.
int resolve_threads(int requested);

}  // namespace ams

#endif
