#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace mep {

/// Fixed chunked partition of [0, n). All concurrency in this project goes
/// through here so that, for a given thread count, work decomposition (and
/// with it every reduction order) is deterministic run to run.
struct Partition {
  std::size_t n = 0;
  unsigned chunks = 1;

  std::size_t begin(unsigned c) const { return n * c / chunks; }
  std::size_t end(unsigned c) const { return n * (c + 1) / chunks; }
};

/// Runs fn(chunk_index, begin, end) over a fixed partition. With one chunk
/// the call is inlined on the calling thread.
template <class Fn>
void parallel_for_chunks(std::size_t n, unsigned nthreads, Fn&& fn) {
  if (nthreads <= 1 || n < 2048) {
    fn(0u, std::size_t{0}, n);
    return;
  }
  Partition part{n, nthreads};
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (unsigned c = 0; c < nthreads; ++c)
    pool.emplace_back([&, c] { fn(c, part.begin(c), part.end(c)); });
  for (auto& t : pool) t.join();
}

/// Chunked sum reduction; partials are combined in chunk order, which keeps
/// the result bitwise reproducible for a fixed thread count.
template <class Fn>
double parallel_sum(std::size_t n, unsigned nthreads, Fn&& term) {
  if (nthreads <= 1 || n < 2048) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += term(i);
    return s;
  }
  std::vector<double> partial(nthreads, 0.0);
  parallel_for_chunks(n, nthreads, [&](unsigned c, std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += term(i);
    partial[c] = s;
  });
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace mep
