#pragma once

#include <cstddef>
#include <functional>

namespace hrlc {

// Worker cap shared by every parallel loop in the library. Results never
// depend on it: work is split into chunks whose boundaries depend only on
// the problem size, and reductions are combined in chunk order.
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Runs fn(chunk) for chunk in [0, num_chunks), possibly concurrently.
void parallel_for(std::size_t num_chunks, const std::function<void(std::size_t)>& fn);

// Number of fixed-size chunks covering `n` items.
constexpr std::size_t chunk_count(std::size_t n, std::size_t chunk) {
  return (n + chunk - 1) / chunk;
}

}  // namespace hrlc
