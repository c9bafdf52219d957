#pragma once

#include <vector>

#include "covhf/weight.hpp"

namespace covhf {

/// Spot quantities at one instant s feeding the asymptotic variance w_s^2.
struct AvarInputs {
  double ic_x = 0.0;   ///< [X]'
  double ic_y = 0.0;   ///< [Y]'
  double ic_xy = 0.0;  ///< [X,Y]'
  double psi11 = 0.0;  ///< noise covariance
  double psi22 = 0.0;
  double psi12 = 0.0;
  double chi = 0.0;  ///< synchronicity, in [0, 1]
  double z_x = 0.0;  ///< [Z^X]'
  double z_y = 0.0;  ///< [Z^Y]'
  double z_xy = 0.0;  ///< [Z^X, Z^Y]'
  double z_xY = 0.0;  ///< [Z^X, Y]'
  double z_Xy = 0.0;  ///< [X, Z^Y]'
  double G = 1.0;
  double F1 = 1.0;
  double F2 = 1.0;
  double F12 = 1.0;
  double theta = 1.0;
  KernelConstants constants;

  void validate() const;
  bool has_endogenous() const;
};

/// Exogenous-noise w^2. Rejects nonzero endogenous fields.
double w_squared_exo(const AvarInputs& in);

/// w^2 with endogenous noise. Throws std::domain_error if the result is negative.
double w_squared_endo(const AvarInputs& in);

struct SamplingCharacteristics {
  double G = 0.0;
  double F1 = 0.0;
  double F2 = 0.0;
  double F12 = 0.0;
  double chi = 0.0;
};

/// G, F^1, F^2, F^{1*2} at time s for independent Poisson designs whose rates
/// switch from p_lo to p_hi at tau (post-change regime applies from s = tau on).
SamplingCharacteristics gf_poisson_changepoint(double p1_lo, double p1_hi, double p2_lo, double p2_hi,
                                               double tau1, double tau2, double s);

/// Copies the sampling characteristics into `in`.
void apply(AvarInputs& in, const SamplingCharacteristics& gf);

struct AvarSegment {
  double start = 0.0;
  double end = 0.0;
  AvarInputs inputs;
};

/// V_t = int_0^t w_s^2 ds for piecewise-constant inputs. Segments must be
/// ordered, contiguous (up to 1e-12) and cover [0, t]; parts beyond t are ignored.
double integrated_variance(const std::vector<AvarSegment>& segments, double t, bool endogenous);

/// Segments of [0, t] split at tau1 and tau2 with `base` completed by
/// gf_poisson_changepoint on each piece.
std::vector<AvarSegment> poisson_changepoint_segments(const AvarInputs& base, double p1_lo, double p1_hi,
                                                      double p2_lo, double p2_hi, double tau1,
                                                      double tau2, double t);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// estimate -/+ z_{(1+level)/2} b_n^{1/4} sqrt(V_t).
Interval oracle_ci(double estimate, double v_t, double b_n, double level);

}  // namespace covhf
