#include "covhf/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace covhf {

void DiffusionSpec::validate() const {
  if (!(sigma_x > 0.0) || !(sigma_y > 0.0)) {
    throw std::invalid_argument("DiffusionSpec: volatilities must be positive");
  }
  if (!(std::abs(rho) <= 1.0)) throw std::invalid_argument("DiffusionSpec: |rho| must be <= 1");
  for (double v : {mu_x, mu_y, phi_x, phi_y}) {
    if (!std::isfinite(v)) throw std::invalid_argument("DiffusionSpec: non-finite parameter");
  }
}

void NoiseSpec::validate() const {
  switch (mode) {
    case NoiseMode::none:
      return;
    case NoiseMode::gaussian_iid:
      if (!(omega_x >= 0.0) || !(omega_y >= 0.0)) {
        throw std::invalid_argument("NoiseSpec: omega must be nonnegative");
      }
      return;
    case NoiseMode::rounding:
      if (!(gamma_x > 0.0) || !(gamma_y > 0.0)) {
        throw std::invalid_argument("NoiseSpec: rounding grids must be positive");
      }
      return;
  }
}

void SamplingSpec::validate() const {
  if (n_scale == 0) throw std::invalid_argument("SamplingSpec: n_scale must be positive");
  if (!(p1 > 0.0) || !(p2 > 0.0)) throw std::invalid_argument("SamplingSpec: rates must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("SamplingSpec: horizon must be positive");
  }
  if (mode == SamplingMode::poisson_changepoint) {
    if (!(p1_bar > 0.0) || !(p2_bar > 0.0)) {
      throw std::invalid_argument("SamplingSpec: post-change rates must be positive");
    }
    if (!(tau1 >= 0.0) || !(tau2 >= 0.0)) {
      throw std::invalid_argument("SamplingSpec: change points must be nonnegative");
    }
  }
  if (mode == SamplingMode::regular && !(offset >= 0.0)) {
    throw std::invalid_argument("SamplingSpec: offset must be nonnegative");
  }
}

double SamplingSpec::expected_ticks() const {
  const double n = static_cast<double>(n_scale);
  auto count = [&](double lo, double hi, double tau) {
    if (mode != SamplingMode::poisson_changepoint) return n * lo * horizon;
    const double pre = std::min(tau, horizon);
    return n * (lo * pre + hi * (horizon - pre));
  };
  return 1.0 + std::max(count(p1, p1_bar, tau1), count(p2, p2_bar, tau2));
}

void ScenarioSpec::validate() const {
  diffusion.validate();
  noise.validate();
  sampling.validate();
  if (fine_steps != 0 && static_cast<double>(fine_steps) < 10.0 * sampling.expected_ticks()) {
    throw std::invalid_argument("ScenarioSpec: fine_steps must be at least 10x the expected tick count");
  }
}

std::uint64_t ScenarioSpec::resolved_fine_steps() const {
  if (fine_steps != 0) return fine_steps;
  return static_cast<std::uint64_t>(std::ceil(50.0 * sampling.expected_ticks()));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t rep) {
  return splitmix64(master ^ splitmix64(rep + 0x5851F42D4C957F2DULL));
}

std::uint64_t stream_seed(std::uint64_t seed, Channel channel) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(channel) * 0x632BE59BD9B4E019ULL));
}

std::mt19937_64 make_stream(std::uint64_t seed, Channel channel) {
  return std::mt19937_64(stream_seed(seed, channel));
}

std::size_t LatentPath::nearest(double t) const {
  if (x.empty()) throw std::logic_error("LatentPath: empty path");
  const double k = std::round(t / dt);
  if (!(k > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(k), x.size() - 1);
}

LatentPath simulate_latent(const ScenarioSpec& spec) {
  spec.validate();
  const auto& d = spec.diffusion;
  const std::uint64_t steps = spec.resolved_fine_steps();
  LatentPath path;
  path.dt = spec.sampling.horizon / static_cast<double>(steps);
  path.x.resize(steps + 1);
  path.y.resize(steps + 1);

  auto rng = make_stream(spec.seed, Channel::paths);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sq = std::sqrt(path.dt);
  const double rho_c = std::sqrt(std::max(0.0, 1.0 - d.rho * d.rho));
  double w1 = 0.0;
  double w2 = 0.0;
  path.x[0] = 0.0;
  path.y[0] = 0.0;
  for (std::uint64_t k = 1; k <= steps; ++k) {
    w1 += sq * normal(rng);
    w2 += sq * normal(rng);
    const double t = static_cast<double>(k) * path.dt;
    path.x[k] = d.mu_x * t + d.sigma_x * w1;
    path.y[k] = d.mu_y * t + d.sigma_y * (d.rho * w1 + rho_c * w2);
  }
  return path;
}

namespace {

// Arrival times in (start, end] of a rate-`rate` Poisson process started at `start`.
void poisson_arrivals(std::mt19937_64& rng, double rate, double start, double end, bool end_inclusive,
                      std::vector<double>& out) {
  std::exponential_distribution<double> gap(rate);
  double t = start;
  for (;;) {
    t += gap(rng);
    if (t > end || (!end_inclusive && t == end)) break;
    out.push_back(t);
  }
}

std::vector<double> regular_grid(double step, double offset, double horizon) {
  std::vector<double> out{0.0};
  for (std::uint64_t j = 0;; ++j) {
    const double t = offset + static_cast<double>(j) * step;
    if (t > horizon) break;
    if (t > 0.0) out.push_back(t);
  }
  return out;
}

SamplingDesign one_design(const SamplingSpec& spec, std::mt19937_64& rng, double p, double p_bar,
                          double tau, double offset, const char* label) {
  const double n = static_cast<double>(spec.n_scale);
  std::vector<double> times;
  switch (spec.mode) {
    case SamplingMode::regular:
      times = regular_grid(1.0 / (n * p), offset, spec.horizon);
      break;
    case SamplingMode::poisson:
      times.push_back(0.0);
      poisson_arrivals(rng, n * p, 0.0, spec.horizon, true, times);
      break;
    case SamplingMode::poisson_changepoint:
      times.push_back(0.0);
      if (tau >= spec.horizon) {
        poisson_arrivals(rng, n * p, 0.0, spec.horizon, true, times);
      } else {
        poisson_arrivals(rng, n * p, 0.0, tau, false, times);
        poisson_arrivals(rng, n * p_bar, tau, spec.horizon, true, times);
      }
      break;
  }
  if (times.size() < 2) {
    throw std::runtime_error(std::string("sample_times: design ") + label +
                             " received no observation after time 0");
  }
  return SamplingDesign(std::move(times));
}

}  // namespace

std::pair<SamplingDesign, SamplingDesign> sample_times(const SamplingSpec& spec, std::uint64_t seed) {
  spec.validate();
  auto rng_s = make_stream(seed, Channel::times_s);
  auto rng_t = make_stream(seed, Channel::times_t);
  SamplingDesign s = one_design(spec, rng_s, spec.p1, spec.p1_bar, spec.tau1, 0.0, "S");
  SamplingDesign t = one_design(spec, rng_t, spec.p2, spec.p2_bar, spec.tau2, spec.offset, "T");
  return {std::move(s), std::move(t)};
}

namespace {

TickSeries observe_one(const std::vector<double>& latent, const LatentPath& path,
                       const SamplingDesign& design, double phi, double sqrt_n, NoiseMode mode,
                       double omega, double gamma, std::mt19937_64& rng) {
  std::vector<double> values(design.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> dither(-0.5, 0.5);
  double prev = latent[0];  // latent value at S^{-1} = 0
  for (std::size_t i = 0; i < design.size(); ++i) {
    const double lat = latent[path.nearest(design[i])];
    double v = lat;
    if (phi != 0.0) v += sqrt_n * phi * (lat - prev);
    prev = lat;
    switch (mode) {
      case NoiseMode::none:
        break;
      case NoiseMode::gaussian_iid:
        v += omega * normal(rng);
        break;
      case NoiseMode::rounding: {
        const double u = gamma * dither(rng);
        v = gamma * round_half_up((v + u) / gamma);
        break;
      }
    }
    values[i] = v;
  }
  return TickSeries(std::vector<double>(design.times().begin(), design.times().end()),
                    std::move(values));
}

}  // namespace

std::pair<TickSeries, TickSeries> observe(const LatentPath& latent, const SamplingDesign& s,
                                          const SamplingDesign& t, const ScenarioSpec& spec) {
  spec.validate();
  const double end = latent.dt * static_cast<double>(latent.x.size() - 1);
  if ((!s.empty() && s.back() > end + 0.5 * latent.dt) ||
      (!t.empty() && t.back() > end + 0.5 * latent.dt)) {
    throw std::invalid_argument("observe: sample times beyond the latent grid");
  }
  const double sqrt_n = std::sqrt(static_cast<double>(spec.sampling.n_scale));
  auto rng_x = make_stream(spec.seed, Channel::noise_x);
  auto rng_y = make_stream(spec.seed, Channel::noise_y);
  const auto& d = spec.diffusion;
  const auto& nz = spec.noise;
  TickSeries x = observe_one(latent.x, latent, s, d.phi_x, sqrt_n, nz.mode, nz.omega_x, nz.gamma_x, rng_x);
  TickSeries y = observe_one(latent.y, latent, t, d.phi_y, sqrt_n, nz.mode, nz.omega_y, nz.gamma_y, rng_y);
  return {std::move(x), std::move(y)};
}

SimulatedPair simulate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  auto [s, t] = sample_times(spec.sampling, spec.seed);
  const LatentPath latent = simulate_latent(spec);
  auto [x, y] = observe(latent, s, t, spec);
  return {std::move(x), std::move(y)};
}

double true_ic(const DiffusionSpec& spec, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("true_ic: t must be nonnegative");
  return spec.rho * spec.sigma_x * spec.sigma_y * t;
}

double round_half_up(double x) { return std::floor(x + 0.5); }

RoundingKernel rounding_kernel(double x, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("rounding_kernel: gamma must be positive");
  const double r = x / gamma;
  const double delta = round_half_up(r) - r;
  const double sign_neg = -delta >= 0.0 ? 1.0 : -1.0;
  RoundingKernel k;
  k.value_far = gamma * (delta + sign_neg);
  k.prob_far = std::abs(delta);
  k.value_near = gamma * delta;
  k.prob_near = 1.0 - std::abs(delta);
  return k;
}

}  // namespace covhf
