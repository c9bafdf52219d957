#pragma once

#include "covhf/preavg.hpp"

namespace covhf {

/// Classical Hayashi-Yoshida estimator: sum of dX_i dY_j over all pairs of
/// observation intervals (S^{i-1}, S^i] and (T^{j-1}, T^j] that overlap.
/// Each series needs at least two ticks.
double hayashi_yoshida(const TickSeries& x, const TickSeries& y);

/// sum_k dX_k dY_k for two series on identical stamps.
double realized_covariance(const TickSeries& x, const TickSeries& y);

/// Previous-tick realized covariance on the grid k * grid_step, k = 0..floor(horizon/grid_step).
/// Grid points before either series' first tick are dropped.
/// Requires 0 < grid_step < horizon.
double previous_tick_rc(const TickSeries& x, const TickSeries& y, double grid_step, double horizon);

}  // namespace covhf
