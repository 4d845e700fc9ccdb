#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "etes/error.hpp"
#include "etes/experiment.hpp"

namespace etes {

const char* to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Target: return "target";
    case ControllerKind::LieES: return "lie_es";
    case ControllerKind::ClassicalES: return "classical_es";
    case ControllerKind::ClassicalAveraged: return "classical_avg";
  }
  return "unknown";
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message, const YAML::Node& node) {
  std::string where;
  if (node.IsDefined() && node.Mark().line >= 0) where = " (line " + std::to_string(node.Mark().line + 1) + ")";
  throw Error(ErrorKind::ConfigInvalid, path + ": " + message + where);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void require_map(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) fail(path, "expected a mapping", node);
}

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  require_map(node, path);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(join(path, key), "unknown key", kv.first);
  }
}

double as_double(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, "expected a number", node);
  try {
    const double v = node.as<double>();
    if (!std::isfinite(v)) fail(path, "must be finite", node);
    return v;
  } catch (const YAML::Exception&) {
    fail(path, "expected a number, got '" + node.Scalar() + "'", node);
  }
}

double positive(const YAML::Node& node, const std::string& path) {
  const double v = as_double(node, path);
  if (!(v > 0.0)) fail(path, "must be > 0", node);
  return v;
}

int as_int(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, "expected an integer", node);
  try {
    return node.as<int>();
  } catch (const YAML::Exception&) {
    fail(path, "expected an integer, got '" + node.Scalar() + "'", node);
  }
}

bool as_bool(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, "expected true or false", node);
  try {
    return node.as<bool>();
  } catch (const YAML::Exception&) {
    fail(path, "expected true or false, got '" + node.Scalar() + "'", node);
  }
}

bool is_auto(const YAML::Node& node) { return node.IsScalar() && node.Scalar() == "auto"; }

std::optional<double> positive_or_auto(const YAML::Node& node, const std::string& path) {
  if (is_auto(node)) return std::nullopt;
  return positive(node, path);
}

Vector as_vector(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) fail(path, "expected a list of numbers", node);
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = as_double(node[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

std::vector<double> as_list(const YAML::Node& node, const std::string& path) {
  const Vector v = as_vector(node, path);
  return {v.data(), v.data() + v.size()};
}

Eigen::MatrixXd as_matrix(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence() || node.size() == 0) fail(path, "expected a nested list of rows", node);
  const std::size_t rows = node.size();
  Eigen::MatrixXd m;
  for (std::size_t r = 0; r < rows; ++r) {
    const Vector row = as_vector(node[r], path + "[" + std::to_string(r) + "]");
    if (r == 0) m.resize(static_cast<Eigen::Index>(rows), row.size());
    if (row.size() != m.cols()) fail(path + "[" + std::to_string(r) + "]", "row length differs from row 0", node[r]);
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

ControllerKind parse_kind(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, "expected a controller name", node);
  const auto s = node.Scalar();
  if (s == "target") return ControllerKind::Target;
  if (s == "lie_es") return ControllerKind::LieES;
  if (s == "classical_es") return ControllerKind::ClassicalES;
  if (s == "classical_avg") return ControllerKind::ClassicalAveraged;
  fail(path, "must be one of target | lie_es | classical_es | classical_avg, got '" + s + "'", node);
}

void parse_controller(const YAML::Node& node, ControllerSpec& c) {
  const std::string p = "controller";
  check_keys(node, p, {"kind", "k", "rho", "epsilon", "a", "omega"});
  if (!node["kind"]) fail(join(p, "kind"), "is required", node);
  c.kind = parse_kind(node["kind"], join(p, "kind"));
  if (node["k"]) {
    c.k = as_double(node["k"], join(p, "k"));
    if (!(c.k > 0.0 && c.k < 1.0)) fail(join(p, "k"), "must lie in (0, 1)", node["k"]);
  }
  if (node["rho"]) c.rho = positive(node["rho"], join(p, "rho"));
  if (node["epsilon"]) c.epsilon = positive(node["epsilon"], join(p, "epsilon"));
  if (node["a"]) c.a = positive(node["a"], join(p, "a"));
  if (node["omega"]) c.omega = positive(node["omega"], join(p, "omega"));
}

void parse_cost(const YAML::Node& node, CostSpec& c) {
  check_keys(node, "cost", {"Q", "u_star"});
  if (!node["Q"]) fail("cost.Q", "is required", node);
  if (!node["u_star"]) fail("cost.u_star", "is required", node);
  c.q = as_matrix(node["Q"], "cost.Q");
  c.u_star = as_vector(node["u_star"], "cost.u_star");
  if (c.q.rows() != c.u_star.size() || c.q.cols() != c.u_star.size()) {
    fail("cost.Q", "must be n x n with n = length of cost.u_star", node["Q"]);
  }
}

Dither parse_dither(const YAML::Node& node) {
  check_keys(node, "dither", {"period", "channels"});
  const double period = node["period"] ? positive(node["period"], "dither.period") : 1.0;
  const auto& ch = node["channels"];
  if (!ch || !ch.IsSequence() || ch.size() == 0) fail("dither.channels", "expected a non-empty list of channels", node);
  std::vector<std::vector<Harmonic>> channels;
  for (std::size_t c = 0; c < ch.size(); ++c) {
    const std::string cp = "dither.channels[" + std::to_string(c) + "]";
    if (!ch[c].IsSequence()) fail(cp, "expected a list of harmonics", ch[c]);
    std::vector<Harmonic> hs;
    for (std::size_t h = 0; h < ch[c].size(); ++h) {
      const std::string hp = cp + "[" + std::to_string(h) + "]";
      const auto& hn = ch[c][h];
      check_keys(hn, hp, {"amplitude", "multiple", "phase"});
      Harmonic harmonic;
      if (!hn["amplitude"]) fail(join(hp, "amplitude"), "is required", hn);
      harmonic.amplitude = as_double(hn["amplitude"], join(hp, "amplitude"));
      harmonic.multiple = hn["multiple"] ? as_int(hn["multiple"], join(hp, "multiple")) : 1;
      harmonic.phase = hn["phase"] ? as_double(hn["phase"], join(hp, "phase")) : 0.0;
      hs.push_back(harmonic);
    }
    channels.push_back(std::move(hs));
  }
  return Dither(period, std::move(channels));
}

void parse_initial(const YAML::Node& node, InitialSpec& s) {
  check_keys(node, "initial", {"u", "y", "e_u", "e_y", "tau"});
  if (node["u"]) s.u = as_vector(node["u"], "initial.u");
  if (node["y"]) s.y = as_vector(node["y"], "initial.y");
  if (node["e_u"]) s.e_u = as_vector(node["e_u"], "initial.e_u");
  if (node["e_y"]) s.e_y = as_vector(node["e_y"], "initial.e_y");
  if (node["tau"]) s.tau = as_double(node["tau"], "initial.tau");
}

void parse_simulation(const YAML::Node& node, SimulationSpec& s) {
  const std::string p = "simulation";
  check_keys(node, p, {"max_t", "max_j", "flow_step", "event_tol", "min_flow_after_jump", "record_stride"});
  if (node["max_t"]) s.max_t = positive(node["max_t"], join(p, "max_t"));
  if (node["max_j"]) {
    s.max_j = as_int(node["max_j"], join(p, "max_j"));
    if (s.max_j < 1) fail(join(p, "max_j"), "must be >= 1", node["max_j"]);
  }
  if (node["flow_step"]) s.flow_step = positive_or_auto(node["flow_step"], join(p, "flow_step"));
  if (node["event_tol"]) s.event_tol = positive(node["event_tol"], join(p, "event_tol"));
  if (node["min_flow_after_jump"]) {
    s.min_flow_after_jump = as_double(node["min_flow_after_jump"], join(p, "min_flow_after_jump"));
    if (s.min_flow_after_jump < 0.0) fail(join(p, "min_flow_after_jump"), "must be >= 0", node["min_flow_after_jump"]);
  }
  if (node["record_stride"]) {
    s.record_stride = as_int(node["record_stride"], join(p, "record_stride"));
    if (s.record_stride < 1) fail(join(p, "record_stride"), "must be >= 1", node["record_stride"]);
  }
}

void parse_analysis(const YAML::Node& node, AnalysisSpec& a) {
  const std::string p = "analysis";
  check_keys(node, p,
             {"dwell", "stats", "gradient_check", "closeness", "closeness_horizon", "closeness_grid", "envelope", "nu",
              "delta", "beta1", "beta2"});
  if (node["dwell"]) a.dwell = as_bool(node["dwell"], join(p, "dwell"));
  if (node["stats"]) a.stats = as_bool(node["stats"], join(p, "stats"));
  if (node["gradient_check"]) a.gradient_check = as_bool(node["gradient_check"], join(p, "gradient_check"));
  if (node["closeness"]) a.closeness = as_bool(node["closeness"], join(p, "closeness"));
  if (node["closeness_horizon"]) a.closeness_horizon = positive(node["closeness_horizon"], join(p, "closeness_horizon"));
  if (node["closeness_grid"]) a.closeness_grid = positive(node["closeness_grid"], join(p, "closeness_grid"));
  if (node["envelope"]) a.envelope = as_bool(node["envelope"], join(p, "envelope"));
  if (node["nu"]) a.nu = positive(node["nu"], join(p, "nu"));
  if (node["delta"]) a.delta = positive(node["delta"], join(p, "delta"));
  if (node["beta1"]) a.beta1 = positive_or_auto(node["beta1"], join(p, "beta1"));
  if (node["beta2"]) a.beta2 = positive_or_auto(node["beta2"], join(p, "beta2"));
}

void parse_sweep(const YAML::Node& node, SweepSpec& s) {
  check_keys(node, "sweep", {"epsilon", "a", "omega", "rho"});
  auto list = [&](const char* key, std::vector<double>& out) {
    if (!node[key]) return;
    out = as_list(node[key], join("sweep", key));
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!(out[i] > 0.0)) fail(join("sweep", key) + "[" + std::to_string(i) + "]", "must be > 0", node[key][i]);
    }
  };
  list("epsilon", s.epsilon);
  list("a", s.a);
  list("omega", s.omega);
  list("rho", s.rho);
}

void parse_assert(const YAML::Node& node, AssertSpec& s) {
  const std::string p = "assert";
  check_keys(node, p,
             {"final_u_error_max", "max_jumps_per_flow_step", "min_jumps", "closeness_max", "max_seconds", "no_zeno",
              "horizon_reached"});
  if (node["final_u_error_max"]) s.final_u_error_max = positive(node["final_u_error_max"], join(p, "final_u_error_max"));
  if (node["max_jumps_per_flow_step"]) {
    s.max_jumps_per_flow_step = positive(node["max_jumps_per_flow_step"], join(p, "max_jumps_per_flow_step"));
  }
  if (node["min_jumps"]) s.min_jumps = as_int(node["min_jumps"], join(p, "min_jumps"));
  if (node["closeness_max"]) s.closeness_max = positive(node["closeness_max"], join(p, "closeness_max"));
  if (node["max_seconds"]) s.max_seconds = positive(node["max_seconds"], join(p, "max_seconds"));
  if (node["no_zeno"]) s.no_zeno = as_bool(node["no_zeno"], join(p, "no_zeno"));
  if (node["horizon_reached"]) s.horizon_reached = as_bool(node["horizon_reached"], join(p, "horizon_reached"));
}

void fill_initial_defaults(ExperimentConfig& c) {
  const auto n = c.cost.u_star.size();
  auto fill = [&](Vector& v, const char* name) {
    if (v.size() == 0) {
      v = Vector::Zero(n);
    } else if (v.size() != n) {
      throw Error(ErrorKind::ConfigInvalid, std::string("initial.") + name + ": expected " + std::to_string(n) +
                                                " entries to match cost.u_star");
    }
  };
  fill(c.initial.u, "u");
  fill(c.initial.y, "y");
  fill(c.initial.e_u, "e_u");
  fill(c.initial.e_y, "e_y");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("syntax error: ") + e.what());
  }
  if (!root.IsMap()) throw Error(ErrorKind::ConfigInvalid, "top level must be a mapping");
  check_keys(root, "", {"controller", "cost", "dither", "initial", "simulation", "analysis", "sweep", "assert", "output",
                        "seed"});

  ExperimentConfig config;
  config.cost = CostSpec{QuadraticCost::reference().q(), QuadraticCost::reference().u_star()};
  if (!root["controller"]) throw Error(ErrorKind::ConfigInvalid, "controller: section is required");
  parse_controller(root["controller"], config.controller);
  if (root["cost"]) parse_cost(root["cost"], config.cost);
  if (root["dither"]) {
    try {
      config.dither = parse_dither(root["dither"]);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigInvalid) throw;
      throw Error(ErrorKind::ConfigInvalid, std::string("dither: ") + e.what());
    }
  }
  if (root["initial"]) parse_initial(root["initial"], config.initial);
  if (root["simulation"]) parse_simulation(root["simulation"], config.simulation);
  if (root["analysis"]) parse_analysis(root["analysis"], config.analysis);
  if (root["sweep"]) parse_sweep(root["sweep"], config.sweep);
  if (root["assert"]) parse_assert(root["assert"], config.assertions);
  if (root["output"]) {
    check_keys(root["output"], "output", {"dir"});
    if (root["output"]["dir"]) config.output_dir = root["output"]["dir"].as<std::string>();
  }
  if (root["seed"]) {
    try {
      config.seed = root["seed"].as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      fail("seed", "expected a nonnegative integer", root["seed"]);
    }
  }
  fill_initial_defaults(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigInvalid, "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    std::string detail = e.what();
    detail.erase(0, detail.find(": ") + 2);
    throw Error(ErrorKind::ConfigInvalid, path.string() + ": " + detail);
  }
}

namespace {

void emit_vector(YAML::Emitter& out, const Vector& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v[i];
  out << YAML::EndSeq;
}

void emit_list(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << x;
  out << YAML::EndSeq;
}

void emit_optional(YAML::Emitter& out, const char* key, const std::optional<double>& v, bool auto_when_empty) {
  if (v) {
    out << YAML::Key << key << YAML::Value << *v;
  } else if (auto_when_empty) {
    out << YAML::Key << key << YAML::Value << "auto";
  }
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << to_string(c.controller.kind);
  out << YAML::Key << "k" << YAML::Value << c.controller.k;
  out << YAML::Key << "rho" << YAML::Value << c.controller.rho;
  emit_optional(out, "epsilon", c.controller.epsilon, false);
  emit_optional(out, "a", c.controller.a, false);
  emit_optional(out, "omega", c.controller.omega, false);
  out << YAML::EndMap;

  out << YAML::Key << "cost" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "Q" << YAML::Value << YAML::BeginSeq;
  for (Eigen::Index r = 0; r < c.cost.q.rows(); ++r) emit_vector(out, c.cost.q.row(r).transpose());
  out << YAML::EndSeq;
  out << YAML::Key << "u_star" << YAML::Value;
  emit_vector(out, c.cost.u_star);
  out << YAML::EndMap;

  out << YAML::Key << "dither" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "period" << YAML::Value << c.dither.period();
  out << YAML::Key << "channels" << YAML::Value << YAML::BeginSeq;
  for (const auto& channel : c.dither.channels()) {
    out << YAML::BeginSeq;
    for (const auto& h : channel) {
      out << YAML::Flow << YAML::BeginMap;
      out << YAML::Key << "amplitude" << YAML::Value << h.amplitude;
      out << YAML::Key << "multiple" << YAML::Value << h.multiple;
      out << YAML::Key << "phase" << YAML::Value << h.phase;
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq << YAML::EndMap;

  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "u" << YAML::Value;
  emit_vector(out, c.initial.u);
  out << YAML::Key << "y" << YAML::Value;
  emit_vector(out, c.initial.y);
  out << YAML::Key << "e_u" << YAML::Value;
  emit_vector(out, c.initial.e_u);
  out << YAML::Key << "e_y" << YAML::Value;
  emit_vector(out, c.initial.e_y);
  out << YAML::Key << "tau" << YAML::Value << c.initial.tau;
  out << YAML::EndMap;

  const auto& s = c.simulation;
  out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "max_t" << YAML::Value << s.max_t;
  out << YAML::Key << "max_j" << YAML::Value << s.max_j;
  emit_optional(out, "flow_step", s.flow_step, true);
  out << YAML::Key << "event_tol" << YAML::Value << s.event_tol;
  out << YAML::Key << "min_flow_after_jump" << YAML::Value << s.min_flow_after_jump;
  out << YAML::Key << "record_stride" << YAML::Value << s.record_stride;
  out << YAML::EndMap;

  const auto& a = c.analysis;
  out << YAML::Key << "analysis" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dwell" << YAML::Value << a.dwell;
  out << YAML::Key << "stats" << YAML::Value << a.stats;
  out << YAML::Key << "gradient_check" << YAML::Value << a.gradient_check;
  out << YAML::Key << "closeness" << YAML::Value << a.closeness;
  out << YAML::Key << "closeness_horizon" << YAML::Value << a.closeness_horizon;
  out << YAML::Key << "closeness_grid" << YAML::Value << a.closeness_grid;
  out << YAML::Key << "envelope" << YAML::Value << a.envelope;
  out << YAML::Key << "nu" << YAML::Value << a.nu;
  out << YAML::Key << "delta" << YAML::Value << a.delta;
  emit_optional(out, "beta1", a.beta1, true);
  emit_optional(out, "beta2", a.beta2, true);
  out << YAML::EndMap;

  out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "epsilon" << YAML::Value;
  emit_list(out, c.sweep.epsilon);
  out << YAML::Key << "a" << YAML::Value;
  emit_list(out, c.sweep.a);
  out << YAML::Key << "omega" << YAML::Value;
  emit_list(out, c.sweep.omega);
  out << YAML::Key << "rho" << YAML::Value;
  emit_list(out, c.sweep.rho);
  out << YAML::EndMap;

  const auto& as = c.assertions;
  out << YAML::Key << "assert" << YAML::Value << YAML::BeginMap;
  emit_optional(out, "final_u_error_max", as.final_u_error_max, false);
  emit_optional(out, "max_jumps_per_flow_step", as.max_jumps_per_flow_step, false);
  if (as.min_jumps) out << YAML::Key << "min_jumps" << YAML::Value << *as.min_jumps;
  emit_optional(out, "closeness_max", as.closeness_max, false);
  emit_optional(out, "max_seconds", as.max_seconds, false);
  out << YAML::Key << "no_zeno" << YAML::Value << as.no_zeno;
  out << YAML::Key << "horizon_reached" << YAML::Value << as.horizon_reached;
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << c.output_dir;
  out << YAML::EndMap;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace etes
