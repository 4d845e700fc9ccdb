#include <cmath>
#include <numbers>

#include "etes/error.hpp"
#include "etes/plants.hpp"

namespace etes {

Dither::Dither(double period, std::vector<std::vector<Harmonic>> channels)
    : period_(period), channels_(std::move(channels)) {
  if (!(period_ > 0.0) || !std::isfinite(period_)) throw Error(ErrorKind::DitherInvalid, "period must be > 0");
  if (channels_.empty()) throw Error(ErrorKind::DitherInvalid, "dither needs at least one channel");
}

Dither Dither::reference() {
  const double r2 = std::sqrt(2.0);
  return Dither(1.0, {{Harmonic{r2, 1, 0.0}}, {Harmonic{r2, 2, 0.0}}});
}

void Dither::eval_into(double tau, Vector& out) const {
  out.resize(static_cast<Eigen::Index>(channels_.size()));
  const double phase = 2.0 * std::numbers::pi * std::fmod(tau, period_) / period_;
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    double s = 0.0;
    for (const auto& h : channels_[c]) s += h.amplitude * std::sin(h.multiple * phase + h.phase);
    out[static_cast<Eigen::Index>(c)] = s;
  }
}

Vector Dither::eval(double tau) const {
  Vector out;
  eval_into(tau, out);
  return out;
}

MomentReport validate_dither(const Dither& d, int quadrature_points) {
  if (quadrature_points < 64) throw Error(ErrorKind::InvalidArgument, "dither validation needs >= 64 points");
  const int intervals = quadrature_points % 2 == 0 ? quadrature_points : quadrature_points + 1;
  const auto n = static_cast<Eigen::Index>(d.dimension());
  const double h = d.period() / intervals;
  Vector mean = Vector::Zero(n);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i <= intervals; ++i) {
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const Vector v = d.eval(i * h);
    mean += w * v;
    second += w * (v * v.transpose());
  }
  mean *= h / 3.0;
  second *= h / 3.0 / d.period();
  MomentReport report;
  report.quadrature_points = intervals;
  report.mean_residual = mean.cwiseAbs().maxCoeff();
  report.second_moment_residual = (second - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  report.passed =
      report.mean_residual <= kDitherMomentTolerance && report.second_moment_residual <= kDitherMomentTolerance;
  return report;
}

}  // namespace etes
