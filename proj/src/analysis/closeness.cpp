#include <algorithm>
#include <cmath>
#include <limits>

#include "etes/analysis.hpp"
#include "etes/error.hpp"

namespace etes {

namespace {

/// Every sample of `from` with t + j <= horizon has a partner on `to` with the
/// same j, |t - s| <= eps and state distance <= eps.
bool one_sided_close(const HybridArc& from, const HybridArc& to, double horizon, double eps) {
  const auto& to_ivs = to.intervals();
  for (std::size_t i = 0; i < from.intervals().size(); ++i) {
    const auto& iv = from.intervals()[i];
    if (iv.times.empty() || iv.times.front() + iv.j > horizon) break;
    if (static_cast<std::size_t>(iv.j) >= to_ivs.size()) return false;
    const auto& partner = to_ivs[static_cast<std::size_t>(iv.j)];
    const auto& pt = partner.times;
    for (std::size_t k = 0; k < iv.times.size(); ++k) {
      const double t = iv.times[k];
      if (t + iv.j > horizon) break;
      const auto x = from.state(i, k);
      auto dist_ok = [&](std::size_t idx) {
        return (to.state(static_cast<std::size_t>(iv.j), idx) - x).norm() <= eps;
      };
      const auto it = std::lower_bound(pt.begin(), pt.end(), t);
      std::ptrdiff_t right = it - pt.begin();
      std::ptrdiff_t left = right - 1;
      const auto size = static_cast<std::ptrdiff_t>(pt.size());
      bool found = false;
      while (!found) {
        const bool right_ok = right < size && pt[static_cast<std::size_t>(right)] - t <= eps;
        const bool left_ok = left >= 0 && t - pt[static_cast<std::size_t>(left)] <= eps;
        if (!right_ok && !left_ok) break;
        if (right_ok && dist_ok(static_cast<std::size_t>(right))) found = true;
        if (!found && left_ok && dist_ok(static_cast<std::size_t>(left))) found = true;
        ++right;
        --left;
      }
      if (!found) return false;
    }
  }
  return true;
}

bool close_at(const HybridArc& a, const HybridArc& b, double horizon, double eps) {
  return one_sided_close(a, b, horizon, eps) && one_sided_close(b, a, horizon, eps);
}

}  // namespace

ClosenessReport closeness(const HybridArc& arc_a, const HybridArc& arc_b, double horizon, double grid) {
  if (!(grid > 0.0)) throw Error(ErrorKind::InvalidArgument, "closeness grid must be > 0");
  if (arc_a.dimension() != arc_b.dimension()) throw Error(ErrorKind::DimensionMismatch, "closeness of arcs");
  if (arc_a.max_hybrid_time() < horizon || arc_b.max_hybrid_time() < horizon) {
    throw Error(ErrorKind::InsufficientDomain, "arcs must extend to hybrid time t + j >= " + std::to_string(horizon));
  }
  ClosenessReport report{horizon, grid, 0.0};
  if (close_at(arc_a, arc_b, horizon, 0.0)) return report;
  // Bracket in multiples of the grid, then bisect on the multiple.
  constexpr double kCap = 1e6;
  long lo = 0;
  long hi = 1;
  while (!close_at(arc_a, arc_b, horizon, static_cast<double>(hi) * grid)) {
    lo = hi;
    hi *= 2;
    if (static_cast<double>(hi) * grid > kCap) {
      report.epsilon_achieved = std::numeric_limits<double>::infinity();
      return report;
    }
  }
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    (close_at(arc_a, arc_b, horizon, static_cast<double>(mid) * grid) ? hi : lo) = mid;
  }
  report.epsilon_achieved = static_cast<double>(hi) * grid;
  return report;
}

}  // namespace etes
