#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace sectorlab {

using cplx = std::complex<double>;

// Chunked reduction with a fixed chunk grid: the partial sums are combined in
// index order, so the result does not depend on the number of OpenMP threads.
template <class F>
double deterministic_sum(std::size_t n, F&& term) {
  constexpr std::size_t chunk = 4096;
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(n_chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * chunk;
    const std::size_t hi = std::min(lo + chunk, n);
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partial[static_cast<std::size_t>(c)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives a substream seed from a master seed and a component label, so
// multi-algorithm experiments can share one 64-bit seed.
inline std::uint64_t seed_stream(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : label) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ull;
  }
  std::uint64_t x = seed ^ h;
  return splitmix64(x);
}

}  // namespace sectorlab
