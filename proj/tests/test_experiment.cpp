#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <doctest.h>

#include "etes/error.hpp"
#include "etes/experiment.hpp"

using namespace etes;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("etes_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigInvalid);
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal target config fills defaults") {
  const auto c = parse_config("controller:\n  kind: target\n");
  CHECK(c.controller.kind == ControllerKind::Target);
  CHECK(c.controller.k == 0.75);
  CHECK(c.controller.rho == 1.0);
  CHECK(c.cost.u_star.size() == 2);
  CHECK(c.cost.u_star[0] == 5.0);
  CHECK(c.dither == Dither::reference());
  CHECK(c.initial.u.norm() == 0.0);
  CHECK(c.simulation.max_t == 50.0);
  CHECK_FALSE(c.simulation.flow_step.has_value());
  CHECK(make_simulation_config(c).flow_step == 1e-3);
  CHECK(c.sweep.empty());
  CHECK_NOTHROW(validate_config(c));
}

TEST_CASE("config errors name the key") {
  const auto eps = error_of("controller:\n  kind: lie_es\n  epsilon: -0.1\n");
  CHECK(eps.find("epsilon") != std::string::npos);
  CHECK(error_of("controller:\n  kind: lie_es\n  epsilon: 0\n").find("epsilon") != std::string::npos);
  const auto unknown = error_of("controller:\n  kind: target\n  gain: 2\n");
  CHECK(unknown.find("controller.gain") != std::string::npos);
  CHECK(unknown.find("line 3") != std::string::npos);
  CHECK(error_of("controller:\n  kind: bogus\n").find("kind") != std::string::npos);
  CHECK(error_of("controller:\n  kind: target\n  k: 1.5\n").find("k") != std::string::npos);
  CHECK(error_of("controller: [1, 2\n").size() > 0);
}

TEST_CASE("configs that parse but cannot run") {
  CHECK_THROWS_AS(validate_config(parse_config("controller:\n  kind: lie_es\n")), Error);
  CHECK_THROWS_AS(validate_config(parse_config("controller:\n  kind: classical_es\n  a: 0.1\n")), Error);
  CHECK_THROWS_AS(validate_config(parse_config("controller:\n  kind: target\ninitial:\n  u: [1, 2, 3]\n")), Error);
  CHECK_THROWS_AS(validate_config(parse_config("controller:\n  kind: target\nsweep:\n  epsilon: [0.1]\n")), Error);
}

TEST_CASE("serialize and parse round trip over generated configs") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    ExperimentConfig c;
    c.controller.kind = static_cast<ControllerKind>(pick(rng));
    c.controller.k = 0.05 + 0.9 * unit(rng);
    c.controller.rho = 0.1 + 10 * unit(rng);
    if (c.controller.kind == ControllerKind::LieES) c.controller.epsilon = 0.01 + unit(rng);
    if (c.controller.kind == ControllerKind::ClassicalES) {
      c.controller.a = 0.01 + unit(rng);
      c.controller.omega = 1 + 500 * unit(rng);
    }
    const double off = unit(rng);
    Eigen::MatrixXd q(2, 2);
    q << 1 + unit(rng), off, off, 2 + unit(rng);
    c.cost = CostSpec{q, Vector::Random(2) * 10};
    c.dither = Dither(0.5 + unit(rng), {{{1.0 + unit(rng), 1, unit(rng)}, {0.3, 3, 0.0}}, {{2.0, 2, -unit(rng)}}});
    c.initial = InitialSpec{Vector::Random(2), Vector::Random(2), Vector::Zero(2), Vector::Random(2), unit(rng)};
    c.simulation.max_t = 1 + 100 * unit(rng);
    c.simulation.max_j = 1 + pick(rng) * 1000;
    if (trial % 2) c.simulation.flow_step = 1e-4 + 1e-3 * unit(rng);
    c.simulation.record_stride = 1 + pick(rng);
    c.analysis.closeness = trial % 3 == 0;
    c.analysis.nu = unit(rng);
    if (trial % 4 == 0) c.analysis.beta1 = 0.5 + unit(rng);
    if (c.controller.kind == ControllerKind::LieES) c.sweep.epsilon = {0.08, 0.04, unit(rng) / 10 + 1e-3};
    c.sweep.rho = trial % 2 ? std::vector<double>{1.0, 4.0} : std::vector<double>{};
    if (trial % 5 == 0) c.assertions.final_u_error_max = unit(rng);
    if (trial % 3 == 0) c.assertions.min_jumps = pick(rng);
    c.assertions.no_zeno = trial % 2 == 0;
    c.output_dir = "out/run_" + std::to_string(trial);
    c.seed = static_cast<std::uint64_t>(trial) * 7919u;

    const auto text = serialize_config(c);
    const auto back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize_config(back) == text);
  }
}

TEST_CASE("equilibrium target run writes constant zero-jump files") {
  const auto dir = scratch("equilibrium");
  auto c = parse_config(
      "controller: {kind: target}\ninitial: {u: [5, -5]}\nsimulation: {max_t: 2, flow_step: 0.01}\n");
  RunOptions opts;
  opts.output_dir = dir;
  const auto r = run_experiment(c, opts);
  CHECK(r.arc.jump_count() == 0);
  CHECK(r.all_passed());
  for (const char* f : {"trajectory.csv", "u_series.csv", "held_series.csv", "analysis.json", "config.resolved.yaml"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  std::ifstream u_series(dir / "u_series.csv");
  std::string line;
  std::getline(u_series, line);
  CHECK(line == "t,j,u1,u2");
  int rows = 0;
  while (std::getline(u_series, line)) {
    CHECK(line.substr(line.find(',') + 1) == "0,5,-5");
    ++rows;
  }
  CHECK(rows == 201);
  CHECK(parse_config(slurp(dir / "config.resolved.yaml")) == c);
  const auto analysis = nlohmann::json::parse(slurp(dir / "analysis.json"));
  CHECK(analysis["trigger_stats"]["jump_count"] == 0);
  CHECK(analysis["parameters"]["controller"] == "target");
  std::filesystem::remove_all(dir);
}

TEST_CASE("identical config and seed give byte-identical csv files") {
  const auto c = parse_config(
      "controller: {kind: lie_es, epsilon: 0.1}\nsimulation: {max_t: 3, record_stride: 5}\n"
      "analysis: {gradient_check: true}\n");
  const auto a = scratch("repro_a"), b = scratch("repro_b");
  RunOptions oa, ob;
  oa.output_dir = a;
  ob.output_dir = b;
  run_experiment(c, oa);
  run_experiment(c, ob);
  for (const char* f : {"trajectory.csv", "u_series.csv", "held_series.csv"}) {
    const auto x = slurp(a / f);
    CHECK(!x.empty());
    CHECK(x == slurp(b / f));
  }
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("held series is the staircase u - e_u, y - e_y") {
  const auto c = parse_config("controller: {kind: target}\nsimulation: {max_t: 10, flow_step: 0.01}\n");
  RunOptions opts;
  opts.write_files = false;
  const auto r = run_experiment(c, opts);
  REQUIRE(r.arc.jump_count() >= 1);
  const StateLayout layout{2, false};
  // Within a flow interval the held values never change.
  for (std::size_t iv = 0; iv < r.arc.intervals().size(); ++iv) {
    const auto first = ClosedLoopState::unflatten(r.arc.state(iv, 0), layout);
    const auto last = ClosedLoopState::unflatten(r.arc.state(iv, r.arc.samples_in(iv) - 1), layout);
    CHECK((first.u_hat() - last.u_hat()).norm() < 1e-9);
    CHECK((first.y_hat() - last.y_hat()).norm() < 1e-9);
  }
}

TEST_CASE("epsilon sweep writes three runs and a trend verdict") {
  const auto dir = scratch("sweep");
  const auto c = parse_config(
      "controller: {kind: lie_es, epsilon: 0.04}\nsimulation: {max_t: 25, record_stride: 20}\n"
      "analysis: {closeness: true, closeness_horizon: 20, gradient_check: false}\n"
      "sweep: {epsilon: [0.08, 0.04, 0.02]}\n");
  RunOptions opts;
  opts.output_dir = dir;
  const auto r = run_sweep(c, opts, 2);
  const auto& axis = r.summary["axes"]["epsilon"];
  REQUIRE(axis["runs"].size() == 3);
  CHECK(axis["verdicts"]["closeness_nonincreasing"] == true);
  for (const auto& run : axis["runs"]) CHECK(std::filesystem::exists(std::filesystem::path(run["output_dir"]) / "trajectory.csv"));
  CHECK(std::filesystem::exists(dir / "sweep_summary.json"));
  CHECK(r.all_passed());
  std::filesystem::remove_all(dir);
}
