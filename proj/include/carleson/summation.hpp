#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace carleson {

/// Deterministic pairwise (cascade) summation.
///
/// The split points depend only on the length of the input, so the result is
/// reproducible bit for bit regardless of how the terms were produced. Blocks
/// of at most eight terms are accumulated left to right.
template <typename T>
T pairwise_sum(std::span<const T> terms) {
  constexpr std::size_t kBlock = 8;
  if (terms.empty()) return T(0);
  if (terms.size() <= kBlock) {
    T acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) acc += terms[i];
    return acc;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

template <typename T>
T pairwise_sum(const std::vector<T>& terms) {
  return pairwise_sum(std::span<const T>(terms.data(), terms.size()));
}

}  // namespace carleson
