#include <algorithm>
#include <cmath>

#include "etes/analysis.hpp"
#include "etes/error.hpp"

namespace etes {

DistanceSeries distance_series(const HybridArc& arc, const AttractorSpec& spec, const StateLayout& layout) {
  DistanceSeries series;
  series.hybrid_time.reserve(arc.sample_count());
  series.distance.reserve(arc.sample_count());
  for (std::size_t i = 0; i < arc.intervals().size(); ++i) {
    const auto& iv = arc.intervals()[i];
    for (std::size_t k = 0; k < iv.times.size(); ++k) {
      series.hybrid_time.push_back(iv.times[k] + iv.j);
      series.distance.push_back(distance_to_attractor(spec, Vector(arc.state(i, k)), layout));
    }
  }
  return series;
}

std::vector<double> antitonic_regression(const std::vector<double>& values) {
  // Pool adjacent violators on blocks (mean, weight).
  std::vector<double> means;
  std::vector<std::size_t> weights;
  for (double v : values) {
    means.push_back(v);
    weights.push_back(1);
    while (means.size() > 1 && means[means.size() - 2] < means.back()) {
      const double w1 = static_cast<double>(weights[weights.size() - 2]);
      const double w2 = static_cast<double>(weights.back());
      const double merged = (means[means.size() - 2] * w1 + means.back() * w2) / (w1 + w2);
      const std::size_t w = weights[weights.size() - 2] + weights.back();
      means.pop_back();
      weights.pop_back();
      means.back() = merged;
      weights.back() = w;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t b = 0; b < means.size(); ++b) out.insert(out.end(), weights[b], means[b]);
  return out;
}

namespace {

/// Maximum of the series within each grid cell; empty cells inherit the
/// previous cell's value.
std::vector<double> cell_maxima(const DistanceSeries& s, double span, std::size_t cells) {
  std::vector<double> out(cells, -1.0);
  const double width = span / static_cast<double>(cells);
  for (std::size_t i = 0; i < s.hybrid_time.size(); ++i) {
    if (s.hybrid_time[i] > span) break;
    auto c = static_cast<std::size_t>(s.hybrid_time[i] / width);
    c = std::min(c, cells - 1);
    out[c] = std::max(out[c], s.distance[i]);
  }
  double carry = s.distance.empty() ? 0.0 : s.distance.front();
  for (auto& v : out) {
    if (v < 0.0) {
      v = carry;
    } else {
      carry = v;
    }
  }
  return out;
}

}  // namespace

EnvelopeReport practical_stability_envelope(const std::vector<HybridArc>& arcs, const AttractorSpec& spec,
                                            const StateLayout& layout, double nu, const EnvelopeOptions& options) {
  if (!(nu >= 0.0)) throw Error(ErrorKind::InvalidArgument, "nu must be >= 0");
  if (options.grid_cells == 0) throw Error(ErrorKind::InvalidArgument, "envelope grid needs cells");
  EnvelopeReport report;
  report.nu = nu;
  if (arcs.empty()) {
    report.envelope_dominates = true;
    report.all_eventually_within_nu = true;
    return report;
  }

  std::vector<DistanceSeries> series;
  double span = std::numeric_limits<double>::infinity();
  for (const auto& arc : arcs) {
    series.push_back(distance_series(arc, spec, layout));
    span = std::min(span, arc.max_hybrid_time());
  }

  report.all_eventually_within_nu = true;
  for (const auto& s : series) {
    ArcEnvelope env;
    env.initial_distance = s.distance.front();
    const double arc_span = s.hybrid_time.back();
    const double tail_start = (1.0 - options.tail_fraction) * arc_span;
    std::size_t last_outside = s.distance.size();
    for (std::size_t i = 0; i < s.distance.size(); ++i) {
      if (s.hybrid_time[i] >= tail_start) env.tail_max = std::max(env.tail_max, s.distance[i]);
      if (s.distance[i] > nu) last_outside = i;
    }
    if (last_outside == s.distance.size()) {
      env.entry_time = 0.0;
    } else if (last_outside + 1 < s.distance.size()) {
      env.entry_time = s.hybrid_time[last_outside + 1];
    }
    env.eventually_within_nu = env.entry_time && *env.entry_time <= tail_start;
    report.all_eventually_within_nu = report.all_eventually_within_nu && env.eventually_within_nu;
    report.arcs.push_back(env);
  }

  const std::size_t cells = options.grid_cells;
  std::vector<std::vector<double>> per_arc;
  std::vector<double> upper(cells, 0.0);
  for (const auto& s : series) {
    per_arc.push_back(cell_maxima(s, span, cells));
    for (std::size_t c = 0; c < cells; ++c) upper[c] = std::max(upper[c], per_arc.back()[c]);
  }
  report.fitted_envelope = antitonic_regression(upper);
  report.grid_times.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) report.grid_times[c] = span * static_cast<double>(c) / static_cast<double>(cells);
  for (const auto& values : per_arc) {
    for (std::size_t c = 0; c < cells; ++c) {
      report.max_excess = std::max(report.max_excess, values[c] - report.fitted_envelope[c]);
    }
  }
  report.envelope_dominates = report.max_excess <= nu;
  return report;
}

}  // namespace etes
