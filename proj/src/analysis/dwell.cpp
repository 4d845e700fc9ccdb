#include <algorithm>
#include <cmath>

#include "etes/analysis.hpp"

namespace etes {

DwellReport dwell_time_check(const HybridArc& arc, double delta) {
  DwellReport report;
  report.delta = delta;
  const auto jumps = arc.jump_times();
  report.jump_count = static_cast<int>(jumps.size());
  for (std::size_t i = 1; i < jumps.size(); ++i) report.min_gap = std::min(report.min_gap, jumps[i] - jumps[i - 1]);
  report.fitted_d = report.min_gap;
  report.zeno_suspected = report.min_gap < kZenoGapThreshold;
  report.bound_satisfied = report.fitted_d > 0.0 && dwell_bound_holds(arc, report.fitted_d);
  return report;
}

bool dwell_bound_holds(const HybridArc& arc, double d) {
  if (!(d > 0.0)) return false;
  // For jump indices i < j the tightest pair is s = end of interval i (the
  // (i+1)-th jump time) and t = start of interval j (the j-th jump time).
  const auto jumps = arc.jump_times();
  const auto m = jumps.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j <= m; ++j) {
      const double elapsed = jumps[j - 1] - jumps[i];
      const double allowed = elapsed / d + 1.0;
      if (static_cast<double>(j - i) > allowed * (1.0 + 1e-12) + 1e-9) return false;
    }
  }
  return true;
}

}  // namespace etes
