#include "covhf/avar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace covhf {

void AvarInputs::validate() const {
  if (!(ic_x >= 0.0) || !(ic_y >= 0.0)) throw std::invalid_argument("AvarInputs: negative variance");
  if (ic_xy * ic_xy > ic_x * ic_y * (1.0 + 1e-12)) {
    throw std::invalid_argument("AvarInputs: |ic_xy| exceeds sqrt(ic_x ic_y)");
  }
  if (!(G > 0.0) || !(F1 > 0.0) || !(F2 > 0.0) || !(F12 > 0.0)) {
    throw std::invalid_argument("AvarInputs: G and F must be positive");
  }
  if (!(chi >= 0.0 && chi <= 1.0)) throw std::invalid_argument("AvarInputs: chi must lie in [0, 1]");
  if (!(theta > 0.0)) throw std::invalid_argument("AvarInputs: theta must be positive");
  for (double v : {psi11, psi22, psi12, z_x, z_y, z_xy, z_xY, z_Xy}) {
    if (!std::isfinite(v)) throw std::invalid_argument("AvarInputs: non-finite field");
  }
  if (constants.psi_hy == 0.0) throw std::invalid_argument("AvarInputs: psi_hy is zero");
}

bool AvarInputs::has_endogenous() const {
  return z_x != 0.0 || z_y != 0.0 || z_xy != 0.0 || z_xY != 0.0 || z_Xy != 0.0;
}

double w_squared_exo(const AvarInputs& in) {
  in.validate();
  if (in.has_endogenous()) {
    throw std::invalid_argument("w_squared_exo: endogenous fields are nonzero, use w_squared_endo");
  }
  const auto& k = in.constants;
  const double th = in.theta;
  const double p12 = in.psi12 * in.chi;
  const double a = th * k.kappa * (in.ic_x * in.ic_y + in.ic_xy * in.ic_xy) * in.G;
  const double b = k.kappa_tilde * (in.psi11 * in.psi22 + p12 * p12) / (th * th * th * in.G);
  const double c = k.kappa_bar * (in.ic_x * in.psi22 + in.ic_y * in.psi11 + 2.0 * in.ic_xy * p12) / th;
  const double h2 = k.psi_hy * k.psi_hy;
  return (a + b + c) / (h2 * h2);
}

double w_squared_endo(const AvarInputs& in) {
  in.validate();
  const auto& k = in.constants;
  const double th = in.theta;
  const double q11 = in.psi11 + in.z_x * in.F1;
  const double q22 = in.psi22 + in.z_y * in.F2;
  const double q12 = in.psi12 * in.chi + in.z_xy * in.F12;
  const double d = in.z_xY * in.F1 - in.z_Xy * in.F2;
  const double a = th * k.kappa * (in.ic_x * in.ic_y + in.ic_xy * in.ic_xy) * in.G;
  const double b = k.kappa_tilde * (q11 * q22 + q12 * q12) / (th * th * th * in.G);
  const double c =
      k.kappa_bar * (in.ic_x * q22 + in.ic_y * q11 + 2.0 * in.ic_xy * q12 - d * d / in.G) / th;
  const double h2 = k.psi_hy * k.psi_hy;
  const double w2 = (a + b + c) / (h2 * h2);
  if (w2 < 0.0) throw std::domain_error("w_squared_endo: negative asymptotic variance");
  return w2;
}

SamplingCharacteristics gf_poisson_changepoint(double p1_lo, double p1_hi, double p2_lo, double p2_hi,
                                               double tau1, double tau2, double s) {
  for (double p : {p1_lo, p1_hi, p2_lo, p2_hi}) {
    if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("gf_poisson_changepoint: rates must be positive");
  }
  const double q1 = tau1 <= s ? p1_hi : p1_lo;
  const double q2 = tau2 <= s ? p2_hi : p2_lo;
  SamplingCharacteristics out;
  out.G = 1.0 / q1 + 1.0 / q2 - 1.0 / (q1 + q2);
  out.F1 = 1.0 / q1;
  out.F2 = 1.0 / q2;
  out.F12 = 2.0 / (q1 + q2);
  out.chi = 0.0;
  return out;
}

void apply(AvarInputs& in, const SamplingCharacteristics& gf) {
  in.G = gf.G;
  in.F1 = gf.F1;
  in.F2 = gf.F2;
  in.F12 = gf.F12;
  in.chi = gf.chi;
}

double integrated_variance(const std::vector<AvarSegment>& segments, double t, bool endogenous) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("integrated_variance: bad t");
  constexpr double tol = 1e-12;
  if (t == 0.0) return 0.0;
  if (segments.empty() || std::abs(segments.front().start) > tol) {
    throw std::invalid_argument("integrated_variance: segments must start at 0");
  }
  double total = 0.0;
  double covered = 0.0;
  for (const auto& seg : segments) {
    if (!(seg.end >= seg.start)) throw std::invalid_argument("integrated_variance: reversed segment");
    if (std::abs(seg.start - covered) > tol) throw std::invalid_argument("integrated_variance: gap or overlap");
    covered = seg.end;
    const double len = std::min(seg.end, t) - std::min(seg.start, t);
    if (len <= 0.0) continue;
    total += (endogenous ? w_squared_endo(seg.inputs) : w_squared_exo(seg.inputs)) * len;
  }
  if (covered < t - tol) throw std::invalid_argument("integrated_variance: segments do not cover [0, t]");
  return total;
}

std::vector<AvarSegment> poisson_changepoint_segments(const AvarInputs& base, double p1_lo, double p1_hi,
                                                      double p2_lo, double p2_hi, double tau1,
                                                      double tau2, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("poisson_changepoint_segments: t must be positive");
  std::vector<double> cuts{0.0};
  for (double tau : {std::min(tau1, tau2), std::max(tau1, tau2)}) {
    if (tau > cuts.back() && tau < t) cuts.push_back(tau);
  }
  cuts.push_back(t);
  std::vector<AvarSegment> out;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    AvarSegment seg{cuts[k], cuts[k + 1], base};
    apply(seg.inputs, gf_poisson_changepoint(p1_lo, p1_hi, p2_lo, p2_hi, tau1, tau2, cuts[k]));
    out.push_back(seg);
  }
  return out;
}

Interval oracle_ci(double estimate, double v_t, double b_n, double level) {
  if (!(v_t >= 0.0)) throw std::invalid_argument("oracle_ci: V_t must be nonnegative");
  if (!(b_n > 0.0)) throw std::invalid_argument("oracle_ci: b_n must be positive");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("oracle_ci: level must lie in (0, 1)");
  const boost::math::normal_distribution<double> normal;
  const double z = boost::math::quantile(normal, 0.5 + 0.5 * level);
  const double half = z * std::pow(b_n, 0.25) * std::sqrt(v_t);
  return {estimate - half, estimate + half};
}

}  // namespace covhf
