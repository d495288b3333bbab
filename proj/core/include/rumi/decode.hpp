#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>

namespace rumi {

struct SpanPrediction {
  std::size_t start = 0;
  std::size_t end = 0;
  double joint_prob = 0.0;
  std::string text;
};

/// Counts the elementary steps of decode_span so tests can check it stays linear.
struct DecodeStats {
  std::size_t operations = 0;
};

inline constexpr std::size_t kUnboundedWindow = std::numeric_limits<std::size_t>::max();

/// argmax over start <= end <= start + window of p_start[start] * p_end[end],
/// in O(C) using a monotonic deque over the trailing window of p_start.
/// Ties resolve to the smallest start, then the smallest end.
SpanPrediction decode_span(std::span<const double> p_start, std::span<const double> p_end,
                           std::size_t window = 15, DecodeStats* stats = nullptr);

}  // namespace rumi
