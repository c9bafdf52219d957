#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "covhf/sync.hpp"
#include "covhf/weight.hpp"

namespace covhf {

/// Observed prices of one asset at strictly increasing stamps.
class TickSeries {
 public:
  TickSeries() = default;
  TickSeries(std::vector<double> times, std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  std::span<const double> times() const { return design_.times(); }
  std::span<const double> values() const { return values_; }
  const SamplingDesign& design() const { return design_; }

 private:
  SamplingDesign design_;
  std::vector<double> values_;
};

struct EstimatorConfig {
  double theta = 0.8;
  std::optional<std::size_t> kn_override;
  /// Normalise by (1/kn) sum_{p=1}^{kn-1} g(p/kn) instead of int_0^1 g.
  bool adjusted_psi = true;
  /// Evaluation time t; unset means "all available data".
  std::optional<double> horizon_t;

  void validate() const;
};

/// kn = ceil(theta * sqrt(n_refresh)) clamped to [2, n_refresh / 2], or the
/// override. Rejects n_refresh < 4.
std::size_t choose_kn(std::size_t n_refresh, const EstimatorConfig& cfg);

/// out[i] = sum_{p=1}^{kn-1} g_arr[p] (values[i+p] - values[i+p-1]),
/// i = 0..values.size()-kn, where kn = g_arr.size().
std::vector<double> preaverage(std::span<const double> values, std::span<const double> g_arr);

/// Pre-averages of `series` restricted to the ticks at `design_indices`.
std::vector<double> preaverage(const TickSeries& series, std::span<const std::size_t> design_indices,
                               std::span<const double> g_arr);

/// Everything the double sum needs once designs and kn are fixed.
struct PhyInputs {
  std::span<const double> x_values;  ///< values at s_times
  std::span<const double> s_times;
  std::span<const double> y_values;  ///< values at t_times
  std::span<const double> t_times;
  std::size_t kn = 0;
  double psi = 0.0;  ///< normaliser, (psi * kn)^-2 scales the sum
  std::span<const double> g_arr;
  double horizon = std::numeric_limits<double>::infinity();
  bool band_only = false;
};

struct PhySum {
  double value = 0.0;
  std::size_t terms = 0;  ///< (i, j) pairs with Kbar = 1 inside the horizon
};

/// (psi kn)^-2 sum_{i,j: s_{i+kn} v t_{j+kn} <= horizon} Xbar_i Ybar_j Kbar(i,j),
/// summed i-major with j ascending, compensated.
PhySum phy_sum(const PhyInputs& in);

/// The same double sum evaluated at several horizons in one pass over the
/// terms ordered by activation time s_{i+kn} v t_{j+kn}.
std::vector<double> phy_path(const PhyInputs& in, std::span<const double> horizons);

/// Pre-averaged Hayashi-Yoshida estimator on the given designs. X must be
/// stamped exactly at I and Y at J. kn comes from choose_kn on the refresh
/// count of (I, J).
double phy(const TickSeries& x, const TickSeries& y, const SamplingDesign& i_design,
           const SamplingDesign& j_design, const WeightScheme& scheme, const EstimatorConfig& cfg);

struct ModPhyReport {
  double estimate = 0.0;
  std::size_t kn = 0;
  std::size_t n_refresh = 0;
  double psi = 0.0;
  std::size_t terms = 0;
};

/// Refresh-time interpolation followed by the pre-averaged HY estimator on
/// the interpolated designs. Throws std::invalid_argument when fewer than 4
/// refresh times exist.
ModPhyReport modified_phy(const TickSeries& x, const TickSeries& y, const WeightScheme& scheme,
                          const EstimatorConfig& cfg);

}  // namespace covhf
