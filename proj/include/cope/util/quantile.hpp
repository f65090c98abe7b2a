#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace cope {

/// Nearest-rank percentile of an ascending-sorted sample: the value at rank
/// ceil(p * n) (1-based, clamped to [1, n]) with p = num / den. Integer
/// arithmetic keeps ranks exact, e.g. the 2.5th percentile of 10000 values is
/// rank 250, not 251.
template <typename T>
T nearest_rank(std::span<const T> sorted, std::uint64_t num, std::uint64_t den) {
  if (sorted.empty()) throw std::invalid_argument("nearest_rank of empty sample");
  const std::uint64_t n = sorted.size();
  std::uint64_t rank = (num * n + den - 1) / den;
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return sorted[rank - 1];
}

}  // namespace cope
