#include <algorithm>

#include "etes/analysis.hpp"

namespace etes {

TriggerStats trigger_stats(const HybridArc& arc, std::size_t bins) {
  TriggerStats stats;
  stats.jump_times = arc.jump_times();
  stats.jump_count = static_cast<int>(stats.jump_times.size());
  for (std::size_t i = 1; i < stats.jump_times.size(); ++i) {
    stats.inter_event_times.push_back(stats.jump_times[i] - stats.jump_times[i - 1]);
  }
  if (!arc.intervals().empty()) stats.t_span = arc.final_time().t - arc.intervals().front().times.front();
  stats.jumps_per_unit_t = stats.t_span > 0.0 ? stats.jump_count / stats.t_span : 0.0;
  stats.flow_steps = arc.flow_steps;
  stats.jumps_per_flow_step =
      stats.flow_steps > 0 ? static_cast<double>(stats.jump_count) / static_cast<double>(stats.flow_steps) : 0.0;

  if (!stats.inter_event_times.empty() && bins > 0) {
    const auto [mn, mx] = std::minmax_element(stats.inter_event_times.begin(), stats.inter_event_times.end());
    const double lo = *mn;
    const double width = (*mx - lo) > 0.0 ? (*mx - lo) / static_cast<double>(bins) : 1.0;
    stats.histogram_counts.assign(bins, 0);
    for (std::size_t b = 0; b <= bins; ++b) stats.histogram_edges.push_back(lo + width * static_cast<double>(b));
    for (double gap : stats.inter_event_times) {
      auto b = static_cast<std::size_t>((gap - lo) / width);
      stats.histogram_counts[std::min(b, bins - 1)]++;
    }
  }
  return stats;
}

}  // namespace etes
