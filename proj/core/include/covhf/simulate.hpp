#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "covhf/preavg.hpp"
#include "covhf/sync.hpp"

namespace covhf {

/// Constant-coefficient bivariate diffusion
///   X_t = mu_x t + sigma_x W1_t
///   Y_t = mu_y t + sigma_y (rho W1_t + sqrt(1 - rho^2) W2_t)
/// with endogenous noise loadings Z^X = phi_x X, Z^Y = phi_y Y.
struct DiffusionSpec {
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double rho = 0.0;
  double mu_x = 0.0;
  double mu_y = 0.0;
  double phi_x = 0.0;
  double phi_y = 0.0;

  void validate() const;
};

enum class NoiseMode { none, gaussian_iid, rounding };

struct NoiseSpec {
  NoiseMode mode = NoiseMode::none;
  double omega_x = 0.0;  ///< gaussian_iid standard deviations
  double omega_y = 0.0;
  double gamma_x = 0.0;  ///< rounding grids
  double gamma_y = 0.0;

  void validate() const;
};

enum class SamplingMode { poisson, poisson_changepoint, regular };

/// Arrival rates are n_scale * p. For poisson_changepoint the rate of design k
/// switches from n_scale * p_k to n_scale * p_k_bar at tau_k (a tau at or
/// beyond the horizon means no change). For regular sampling the steps are
/// 1 / (n_scale * p_k) and the second design is shifted by `offset`.
struct SamplingSpec {
  SamplingMode mode = SamplingMode::poisson;
  std::uint64_t n_scale = 1000;
  double p1 = 1.0;
  double p2 = 1.0;
  double p1_bar = 1.0;
  double p2_bar = 1.0;
  double tau1 = 1.0;
  double tau2 = 1.0;
  double horizon = 1.0;
  double offset = 0.0;

  void validate() const;
  /// Expected number of ticks of the busier design.
  double expected_ticks() const;
};

struct ScenarioSpec {
  DiffusionSpec diffusion;
  NoiseSpec noise;
  SamplingSpec sampling;
  std::uint64_t seed = 0;
  /// Latent grid resolution over [0, horizon]; 0 selects 50x the expected tick count.
  std::uint64_t fine_steps = 0;

  void validate() const;
  std::uint64_t resolved_fine_steps() const;
};

/// Independent random streams derived from one replication seed. Changing one
/// channel's consumption never perturbs another channel.
enum class Channel : std::uint64_t { paths = 1, times_s = 2, times_t = 3, noise_x = 4, noise_y = 5 };

std::uint64_t splitmix64(std::uint64_t x);
/// Seed of replication `rep` under `master`.
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t rep);
/// Seed of `channel` under a replication seed.
std::uint64_t stream_seed(std::uint64_t seed, Channel channel);
std::mt19937_64 make_stream(std::uint64_t seed, Channel channel);

/// Latent paths on the grid k * dt, k = 0..steps.
struct LatentPath {
  double dt = 0.0;
  std::vector<double> x;
  std::vector<double> y;

  /// Index of the grid point nearest to t (clamped to the grid).
  std::size_t nearest(double t) const;
};

LatentPath simulate_latent(const ScenarioSpec& spec);

/// Sampling designs (S, T), each starting with a tick at time 0.
/// Throws std::runtime_error if a design receives no arrival after 0.
std::pair<SamplingDesign, SamplingDesign> sample_times(const SamplingSpec& spec, std::uint64_t seed);

/// Observed series: latent value at the nearest grid point, plus endogenous
/// noise sqrt(n) (Z_{S^i} - Z_{S^{i-1}}), plus exogenous noise per NoiseSpec.
std::pair<TickSeries, TickSeries> observe(const LatentPath& latent, const SamplingDesign& s,
                                          const SamplingDesign& t, const ScenarioSpec& spec);

struct SimulatedPair {
  TickSeries x;
  TickSeries y;
};

/// sample_times + simulate_latent + observe for spec.seed.
SimulatedPair simulate_scenario(const ScenarioSpec& spec);

/// rho sigma_x sigma_y t.
double true_ic(const DiffusionSpec& spec, double t);

/// The unique integer a with a - 1/2 <= x < a + 1/2.
double round_half_up(double x);

/// Conditional law of (observed - latent) under uniform-dither rounding at a
/// latent value x: two atoms with their probabilities.
struct RoundingKernel {
  double value_far = 0.0;  ///< gamma (delta + sign(-delta)), probability |delta|
  double prob_far = 0.0;
  double value_near = 0.0;  ///< gamma delta, probability 1 - |delta|
  double prob_near = 0.0;

  double mean() const { return prob_far * value_far + prob_near * value_near; }
};

RoundingKernel rounding_kernel(double x, double gamma);

}  // namespace covhf
