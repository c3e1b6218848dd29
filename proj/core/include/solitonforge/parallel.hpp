#pragma once

#include <cstddef>
#include <functional>

namespace soliton {

// Worker cap taken from SOLITON_FORGE_THREADS (default: hardware concurrency).
int thread_cap();

// Static block partition over [0, n); deterministic regardless of the cap.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace soliton
