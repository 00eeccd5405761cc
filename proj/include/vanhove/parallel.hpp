#pragma once

#include <cstddef>
#include <span>

namespace vanhove {

// Thread count used by the OpenMP kernels. Results never depend on it: every
// parallel reduction writes per-row partials and combines them with
// pairwise_sum in index order.
void set_thread_count(int n);
int thread_count();

// Reads VANHOVE_THREADS; returns 0 when unset or unparsable.
int threads_from_environment();

// Pairwise (cascade) summation in a fixed tree order, so the result only
// depends on the input sequence.
template <typename T>
T pairwise_sum(std::span<const T> xs) {
  constexpr std::size_t block = 32;
  if (xs.size() <= block) {
    T acc{};
    for (const T& x : xs) acc += x;
    return acc;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

// Same tree as pairwise_sum over the terms f(begin), ..., f(end - 1), without
// materializing them.
template <typename T, typename F>
T pairwise_reduce(std::size_t begin, std::size_t end, const F& f) {
  constexpr std::size_t block = 32;
  if (end - begin <= block) {
    T acc{};
    for (std::size_t i = begin; i < end; ++i) acc += f(i);
    return acc;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_reduce<T>(begin, mid, f) + pairwise_reduce<T>(mid, end, f);
}

}  // namespace vanhove
