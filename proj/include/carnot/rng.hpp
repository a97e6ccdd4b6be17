#ifndef CARNOT_RNG_HPP
#define CARNOT_RNG_HPP

#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace carnot {

// Counter-derived substreams: every (seed, stream...) pair owns an
// independent deterministic generator, so parallel consumers produce results
// that do not depend on scheduling.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in [lo, hi] (inclusive); modulo bias is irrelevant here
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next() % span);
  }

  // uniform in [-1, 1]
  double next_symmetric() { return 2.0 * next_double() - 1.0; }
};

inline std::uint64_t mix_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  SplitMix64 s(seed);
  std::uint64_t h = s.next();
  s.state = h ^ (a * 0x9e3779b97f4a7c15ull);
  h = s.next();
  s.state = h ^ (b * 0xc2b2ae3d27d4eb4full);
  h = s.next();
  s.state = h ^ (c * 0x165667b19e3779f9ull);
  return s.next();
}

inline SplitMix64 substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  return SplitMix64(mix_stream(seed, a, b, c));
}

// Thread budget: CARNOT_LAB_THREADS if set, else hardware concurrency.
inline std::size_t thread_budget() {
  if (const char* env = std::getenv("CARNOT_LAB_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs body(i) for i in [0, n). Each index writes only its own slot in the
// caller's output, so results are identical for any thread count.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  std::size_t threads = std::min(thread_budget(), n == 0 ? std::size_t(1) : n);
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < n; i += threads) body(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace carnot

#endif
