#include "covhf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace covhf {

double hayashi_yoshida(const TickSeries& x, const TickSeries& y) {
  if (x.size() < 2 || y.size() < 2) {
    throw std::invalid_argument("hayashi_yoshida: each series needs at least two ticks");
  }
  const auto s = x.times();
  const auto t = y.times();
  const auto xv = x.values();
  const auto yv = y.values();

  // (s[i-1], s[i]] and (t[j-1], t[j]] overlap  <=>  s[i-1] < t[j] and t[j-1] < s[i].
  double sum = 0.0;
  std::size_t lo = 1;
  for (std::size_t i = 1; i < s.size(); ++i) {
    while (lo < t.size() && t[lo] <= s[i - 1]) ++lo;
    const double dx = xv[i] - xv[i - 1];
    for (std::size_t j = lo; j < t.size() && t[j - 1] < s[i]; ++j) {
      sum += dx * (yv[j] - yv[j - 1]);
    }
  }
  return sum;
}

double realized_covariance(const TickSeries& x, const TickSeries& y) {
  if (!std::ranges::equal(x.times(), y.times())) {
    throw std::invalid_argument("realized_covariance: series must share their stamps");
  }
  const auto xv = x.values();
  const auto yv = y.values();
  double sum = 0.0;
  for (std::size_t k = 1; k < xv.size(); ++k) sum += (xv[k] - xv[k - 1]) * (yv[k] - yv[k - 1]);
  return sum;
}

namespace {

// Number of ticks at or before t, scanning forward from `hint`.
std::size_t count_at_or_before(std::span<const double> times, double t, std::size_t hint) {
  while (hint < times.size() && times[hint] <= t) ++hint;
  return hint;
}

}  // namespace

double previous_tick_rc(const TickSeries& x, const TickSeries& y, double grid_step, double horizon) {
  if (!(grid_step > 0.0) || !(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("previous_tick_rc: grid_step and horizon must be positive");
  }
  if (!(grid_step < horizon)) {
    throw std::invalid_argument("previous_tick_rc: grid step must be finer than the horizon");
  }
  if (x.size() == 0 || y.size() == 0) throw std::invalid_argument("previous_tick_rc: empty series");
  const auto xs = x.times();
  const auto ys = y.times();
  const auto xv = x.values();
  const auto yv = y.values();
  const auto steps = static_cast<std::size_t>(std::floor(horizon / grid_step));

  double sum = 0.0;
  bool have_prev = false;
  double px = 0.0;
  double py = 0.0;
  std::size_t cx = 0;
  std::size_t cy = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double g = static_cast<double>(k) * grid_step;
    cx = count_at_or_before(xs, g, cx);
    cy = count_at_or_before(ys, g, cy);
    if (cx == 0 || cy == 0) continue;
    const double vx = xv[cx - 1];
    const double vy = yv[cy - 1];
    if (have_prev) sum += (vx - px) * (vy - py);
    px = vx;
    py = vy;
    have_prev = true;
  }
  return sum;
}

}  // namespace covhf
