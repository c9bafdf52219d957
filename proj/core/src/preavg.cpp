#include "covhf/preavg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "covhf/summation.hpp"

namespace covhf {

TickSeries::TickSeries(std::vector<double> times, std::vector<double> values)
    : design_(std::move(times)), values_(std::move(values)) {
  if (design_.size() != values_.size()) {
    throw std::invalid_argument("TickSeries: times and values differ in length");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("TickSeries: non-finite value");
  }
}

void EstimatorConfig::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw std::invalid_argument("EstimatorConfig: theta must be positive");
  }
  if (horizon_t && !(*horizon_t > 0.0)) {
    throw std::invalid_argument("EstimatorConfig: horizon_t must be positive");
  }
  if (kn_override && *kn_override < 2) {
    throw std::invalid_argument("EstimatorConfig: kn_override must be at least 2");
  }
}

std::size_t choose_kn(std::size_t n_refresh, const EstimatorConfig& cfg) {
  cfg.validate();
  if (n_refresh < 4) throw std::invalid_argument("choose_kn: need at least 4 refresh times");
  if (cfg.kn_override) return *cfg.kn_override;
  const double raw = std::ceil(cfg.theta * std::sqrt(static_cast<double>(n_refresh)));
  const std::size_t upper = n_refresh / 2;
  const auto kn = static_cast<std::size_t>(raw);
  return std::clamp<std::size_t>(kn, 2, upper);
}

std::vector<double> preaverage(std::span<const double> values, std::span<const double> g_arr) {
  const std::size_t kn = g_arr.size();
  if (kn < 2) throw std::invalid_argument("preaverage: kn must be at least 2");
  if (values.size() < kn + 1) throw std::invalid_argument("preaverage: insufficient points");
  std::vector<double> out(values.size() - kn + 1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (std::size_t p = 1; p < kn; ++p) s += g_arr[p] * (values[i + p] - values[i + p - 1]);
    out[i] = s;
  }
  return out;
}

std::vector<double> preaverage(const TickSeries& series, std::span<const std::size_t> design_indices,
                               std::span<const double> g_arr) {
  std::vector<double> v;
  v.reserve(design_indices.size());
  const auto values = series.values();
  for (std::size_t idx : design_indices) {
    if (idx >= values.size()) throw std::out_of_range("preaverage: design index out of range");
    v.push_back(values[idx]);
  }
  return preaverage(v, g_arr);
}

namespace {

void check_inputs(const PhyInputs& in) {
  if (in.x_values.size() != in.s_times.size() || in.y_values.size() != in.t_times.size()) {
    throw std::invalid_argument("phy: values and stamps differ in length");
  }
  if (in.g_arr.size() != in.kn) throw std::invalid_argument("phy: g_arr must have kn entries");
  if (in.s_times.size() < in.kn + 1 || in.t_times.size() < in.kn + 1) {
    throw std::invalid_argument("phy: insufficient data for a complete pre-averaging window");
  }
  if (in.psi == 0.0) throw std::invalid_argument("phy: zero normaliser");
}

template <class Visit>
void for_each_term(const PhyInputs& in, Visit&& visit) {
  const auto xbar = preaverage(in.x_values, in.g_arr);
  const auto ybar = preaverage(in.y_values, in.g_arr);
  const OverlapOracle overlap(in.s_times, in.t_times, in.kn, in.band_only);
  const std::size_t kn = in.kn;
  for (std::size_t i = 0; i < overlap.rows(); ++i) {
    const double s_end = in.s_times[i + kn];
    if (s_end > in.horizon) break;
    const IndexRange& row = overlap.row(i);
    for (std::size_t j = row.begin; j < row.end; ++j) {
      const double t_end = in.t_times[j + kn];
      if (t_end > in.horizon) break;
      visit(std::max(s_end, t_end), xbar[i] * ybar[j]);
    }
  }
}

}  // namespace

PhySum phy_sum(const PhyInputs& in) {
  check_inputs(in);
  Neumaier acc;
  std::size_t terms = 0;
  for_each_term(in, [&](double, double term) {
    acc += term;
    ++terms;
  });
  const double norm = in.psi * static_cast<double>(in.kn);
  return {acc.value() / (norm * norm), terms};
}

std::vector<double> phy_path(const PhyInputs& in, std::span<const double> horizons) {
  check_inputs(in);
  PhyInputs all = in;
  all.horizon = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> terms;
  for_each_term(all, [&](double activation, double term) { terms.emplace_back(activation, term); });
  std::stable_sort(terms.begin(), terms.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<std::size_t> order(horizons.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return horizons[a] < horizons[b]; });

  const double norm = in.psi * static_cast<double>(in.kn);
  std::vector<double> out(horizons.size());
  Neumaier acc;
  std::size_t next = 0;
  for (std::size_t idx : order) {
    const double h = std::min(horizons[idx], in.horizon);
    while (next < terms.size() && terms[next].first <= h) acc += terms[next++].second;
    out[idx] = acc.value() / (norm * norm);
  }
  return out;
}

namespace {

double normaliser(const WeightScheme& scheme, const EstimatorConfig& cfg, std::size_t kn) {
  return cfg.adjusted_psi ? adjusted_psi(scheme, kn) : scheme.constants().psi_hy;
}

}  // namespace

double phy(const TickSeries& x, const TickSeries& y, const SamplingDesign& i_design,
           const SamplingDesign& j_design, const WeightScheme& scheme, const EstimatorConfig& cfg) {
  cfg.validate();
  if (!std::ranges::equal(x.times(), i_design.times()) ||
      !std::ranges::equal(y.times(), j_design.times())) {
    throw std::invalid_argument("phy: series stamps do not match their sampling designs");
  }
  const std::size_t n_refresh = refresh_times(i_design, j_design).size();
  const std::size_t kn = choose_kn(n_refresh, cfg);
  const auto coeffs = discrete_coeffs(scheme, kn);
  PhyInputs in;
  in.x_values = x.values();
  in.s_times = i_design.times();
  in.y_values = y.values();
  in.t_times = j_design.times();
  in.kn = kn;
  in.psi = normaliser(scheme, cfg, kn);
  in.g_arr = coeffs.g;
  if (cfg.horizon_t) in.horizon = *cfg.horizon_t;
  in.band_only = false;
  return phy_sum(in).value;
}

ModPhyReport modified_phy(const TickSeries& x, const TickSeries& y, const WeightScheme& scheme,
                          const EstimatorConfig& cfg) {
  cfg.validate();
  if (x.size() == 0 || y.size() == 0) throw std::invalid_argument("modified_phy: empty series");
  const SyncResult sync = interpolate(x.design(), y.design());
  const std::size_t n_refresh = sync.refresh.size();
  if (n_refresh < 4) throw std::invalid_argument("modified_phy: fewer than 4 refresh times");
  const std::size_t kn = choose_kn(n_refresh, cfg);
  const auto coeffs = discrete_coeffs(scheme, kn);

  std::vector<double> xv(sync.s_index.size());
  std::vector<double> yv(sync.t_index.size());
  for (std::size_t k = 0; k < xv.size(); ++k) xv[k] = x.values()[sync.s_index[k]];
  for (std::size_t k = 0; k < yv.size(); ++k) yv[k] = y.values()[sync.t_index[k]];

  PhyInputs in;
  in.x_values = xv;
  in.s_times = sync.s_hat;
  in.y_values = yv;
  in.t_times = sync.t_hat;
  in.kn = kn;
  in.psi = normaliser(scheme, cfg, kn);
  in.g_arr = coeffs.g;
  if (cfg.horizon_t) in.horizon = *cfg.horizon_t;
  in.band_only = true;
  const PhySum sum = phy_sum(in);
  return {sum.value, kn, n_refresh, in.psi, sum.terms};
}

}  // namespace covhf
