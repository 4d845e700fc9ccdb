#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "etes/error.hpp"
#include "etes/hybrid.hpp"

namespace etes {

bool HybridTimeDomain::well_formed() const {
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const auto& iv = intervals_[i];
    if (iv.j != static_cast<int>(i) || iv.t_start > iv.t_end || iv.t_start < 0.0) return false;
    if (i > 0 && intervals_[i - 1].t_end != iv.t_start) return false;
  }
  return true;
}

const char* to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::HorizonReached: return "HorizonReached";
    case TerminationReason::JumpBudgetExhausted: return "JumpBudgetExhausted";
    case TerminationReason::LeftDomain: return "LeftDomain";
    case TerminationReason::ZenoSuspected: return "ZenoSuspected";
  }
  return "Unknown";
}

HybridSystem make_guarded_system(std::size_t dimension, FlowMap flow, JumpMap jump, EventFunction event,
                                 std::vector<std::string> names) {
  HybridSystem sys;
  sys.dimension = dimension;
  sys.flow_map = std::move(flow);
  sys.jump_map = std::move(jump);
  sys.flow_set = [event](const Vector& x) { return event(x) <= 0.0; };
  sys.jump_set = [event](const Vector& x) { return event(x) >= 0.0; };
  sys.event_function = std::move(event);
  if (names.empty()) {
    for (std::size_t i = 0; i < dimension; ++i) names.push_back("x" + std::to_string(i));
  }
  sys.component_names = std::move(names);
  return sys;
}

HybridArc::HybridArc(std::size_t dimension, std::vector<std::string> names)
    : dimension_(dimension), names_(std::move(names)) {
  if (names_.empty()) {
    for (std::size_t i = 0; i < dimension_; ++i) names_.push_back("x" + std::to_string(i));
  }
  if (names_.size() != dimension_) throw Error(ErrorKind::DimensionMismatch, "component name count");
}

void HybridArc::push_sample(double t, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != dimension_) throw Error(ErrorKind::DimensionMismatch, "arc sample");
  if (intervals_.empty()) intervals_.push_back(ArcInterval{0, {}, {}});
  auto& iv = intervals_.back();
  if (!iv.times.empty() && !(t > iv.times.back())) {
    throw Error(ErrorKind::InvalidArgument, "arc sample times must strictly increase within an interval");
  }
  iv.times.push_back(t);
  iv.states.insert(iv.states.end(), x.data(), x.data() + x.size());
}

void HybridArc::push_jump(double t, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != dimension_) throw Error(ErrorKind::DimensionMismatch, "arc sample");
  const int next_j = intervals_.empty() ? 0 : intervals_.back().j + 1;
  intervals_.push_back(ArcInterval{next_j, {t}, {x.data(), x.data() + x.size()}});
}

Eigen::Map<const Vector> HybridArc::state(std::size_t interval, std::size_t k) const {
  return Eigen::Map<const Vector>(intervals_[interval].states.data() + k * dimension_,
                                  static_cast<Eigen::Index>(dimension_));
}

std::size_t HybridArc::sample_count() const {
  std::size_t n = 0;
  for (const auto& iv : intervals_) n += iv.times.size();
  return n;
}

std::vector<double> HybridArc::jump_times() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < intervals_.size(); ++i) out.push_back(intervals_[i].times.front());
  return out;
}

HybridTimeDomain HybridArc::domain() const {
  std::vector<DomainInterval> out;
  for (const auto& iv : intervals_) {
    if (iv.times.empty()) continue;
    out.push_back({iv.times.front(), iv.times.back(), iv.j});
  }
  return HybridTimeDomain(std::move(out));
}

double HybridArc::max_hybrid_time() const {
  if (intervals_.empty()) return 0.0;
  const auto& last = intervals_.back();
  return last.times.back() + last.j;
}

Vector HybridArc::final_state() const {
  const auto& last = intervals_.back();
  return state(intervals_.size() - 1, last.times.size() - 1);
}

HybridTime HybridArc::final_time() const {
  if (intervals_.empty()) return {};
  return {intervals_.back().times.back(), intervals_.back().j};
}

HybridArc project(const HybridArc& arc, const std::vector<std::size_t>& components) {
  std::vector<std::string> names;
  for (auto c : components) {
    if (c >= arc.dimension()) throw Error(ErrorKind::DimensionMismatch, "projection component out of range");
    names.push_back(arc.component_names()[c]);
  }
  HybridArc out(components.size(), names);
  Vector x(static_cast<Eigen::Index>(components.size()));
  for (std::size_t i = 0; i < arc.intervals().size(); ++i) {
    for (std::size_t k = 0; k < arc.samples_in(i); ++k) {
      const auto full = arc.state(i, k);
      for (std::size_t c = 0; c < components.size(); ++c) x[static_cast<Eigen::Index>(c)] = full[components[c]];
      if (i > 0 && k == 0) {
        out.push_jump(arc.time(i, k), x);
      } else {
        out.push_sample(arc.time(i, k), x);
      }
    }
  }
  out.termination = arc.termination;
  out.flow_steps = arc.flow_steps;
  return out;
}

void write_csv(std::ostream& out, const HybridArc& arc) {
  out << "t,j";
  for (const auto& name : arc.component_names()) out << ',' << name;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < arc.intervals().size(); ++i) {
    const auto& iv = arc.intervals()[i];
    for (std::size_t k = 0; k < iv.times.size(); ++k) {
      out << iv.times[k] << ',' << iv.j;
      const auto x = arc.state(i, k);
      for (Eigen::Index c = 0; c < x.size(); ++c) out << ',' << x[c];
      out << '\n';
    }
  }
  out.precision(old_precision);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidArgument, "csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

}  // namespace

HybridArc read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::InvalidArgument, "csv: missing header");
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "t" || header[1] != "j") {
    throw Error(ErrorKind::InvalidArgument, "csv: header must start with t,j");
  }
  std::vector<std::string> names(header.begin() + 2, header.end());
  HybridArc arc(names.size(), names);
  Vector x(static_cast<Eigen::Index>(names.size()));
  int current_j = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::InvalidArgument, "csv line " + std::to_string(line_no) + ": column count");
    }
    const double t = parse_double(cells[0], line_no);
    const int j = static_cast<int>(parse_double(cells[1], line_no));
    for (std::size_t c = 0; c < names.size(); ++c) x[static_cast<Eigen::Index>(c)] = parse_double(cells[c + 2], line_no);
    if (j == current_j) {
      arc.push_sample(t, x);
    } else if (j == current_j + 1) {
      arc.push_jump(t, x);
      current_j = j;
    } else {
      throw Error(ErrorKind::InvalidArgument, "csv line " + std::to_string(line_no) + ": non-consecutive j");
    }
  }
  return arc;
}

}  // namespace etes
