#include "rumi/decode.hpp"

#include <deque>
#include <stdexcept>

namespace rumi {

SpanPrediction decode_span(std::span<const double> p_start, std::span<const double> p_end,
                           std::size_t window, DecodeStats* stats) {
  if (p_start.size() != p_end.size() || p_start.empty())
    throw std::invalid_argument("decode_span: distributions must be non-empty and equally long");
  std::size_t ops = 0;
  // Front holds the index of the best start in [end - window, end]; equal
  // values keep the earlier index ahead.
  std::deque<std::size_t> best_start;
  SpanPrediction best;
  bool have = false;
  for (std::size_t end = 0; end < p_end.size(); ++end) {
    while (!best_start.empty() && p_start[best_start.back()] < p_start[end]) {
      best_start.pop_back();
      ++ops;
    }
    best_start.push_back(end);
    if (window != kUnboundedWindow) {
      while (best_start.front() + window < end) {
        best_start.pop_front();
        ++ops;
      }
    }
    const std::size_t start = best_start.front();
    const double joint = p_start[start] * p_end[end];
    ops += 2;
    if (!have || joint > best.joint_prob || (joint == best.joint_prob && start < best.start)) {
      best.start = start;
      best.end = end;
      best.joint_prob = joint;
      have = true;
    }
  }
  if (stats) stats->operations += ops;
  return best;
}

}  // namespace rumi
