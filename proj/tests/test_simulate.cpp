#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "covhf/harness.hpp"
#include "covhf/simulate.hpp"

using namespace covhf;
using V = std::vector<double>;

namespace {

ScenarioSpec small_spec(std::uint64_t n = 200) {
  ScenarioSpec s;
  s.sampling.n_scale = n;
  return s;
}

// Asymptotic two-sample Kolmogorov-Smirnov p-value.
double ks_pvalue(V a, V b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) q += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(q, 0.0, 1.0);
}

V gaps(const SamplingDesign& d) {
  V out;
  for (std::size_t k = 1; k < d.size(); ++k) out.push_back(d[k] - d[k - 1]);
  return out;
}

}  // namespace

TEST_CASE("spec validation") {
  ScenarioSpec s = small_spec();
  CHECK_NOTHROW(s.validate());
  s.diffusion.rho = 1.2;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = small_spec();
  s.diffusion.sigma_x = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = small_spec();
  s.noise.mode = NoiseMode::rounding;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = small_spec();
  s.fine_steps = 100;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = small_spec();
  s.sampling.p2 = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = small_spec();
  CHECK(s.resolved_fine_steps() == static_cast<std::uint64_t>(std::ceil(50.0 * 201.0)));
}

TEST_CASE("seed derivation") {
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(replication_seed(1, 0) != replication_seed(1, 1));
  CHECK(replication_seed(1, 0) != replication_seed(2, 0));
  CHECK(stream_seed(5, Channel::paths) != stream_seed(5, Channel::noise_x));
}

TEST_CASE("simulation is deterministic in the seed") {
  ScenarioSpec s = small_spec();
  s.noise.mode = NoiseMode::gaussian_iid;
  s.noise.omega_x = s.noise.omega_y = 0.01;
  s.seed = 77;
  const auto a = simulate_scenario(s);
  const auto b = simulate_scenario(s);
  CHECK(std::ranges::equal(a.x.times(), b.x.times()));
  CHECK(std::ranges::equal(a.x.values(), b.x.values()));
  CHECK(std::ranges::equal(a.y.values(), b.y.values()));
  s.seed = 78;
  CHECK_FALSE(std::ranges::equal(simulate_scenario(s).x.values(), a.x.values()));
}

TEST_CASE("noise settings do not perturb paths or times") {
  ScenarioSpec s = small_spec();
  s.seed = 3;
  const auto clean = simulate_scenario(s);
  s.noise.mode = NoiseMode::rounding;
  s.noise.gamma_x = s.noise.gamma_y = 0.05;
  const auto rounded = simulate_scenario(s);
  CHECK(std::ranges::equal(clean.x.times(), rounded.x.times()));
  CHECK(std::ranges::equal(clean.y.times(), rounded.y.times()));
  s.noise.mode = NoiseMode::none;
  s.diffusion.phi_x = 0.2;
  ScenarioSpec base = small_spec();
  base.seed = 3;
  CHECK(std::ranges::equal(simulate_latent(s).x, simulate_latent(base).x));
}

TEST_CASE("perfect correlation") {
  ScenarioSpec s = small_spec(100);
  s.diffusion.rho = 1.0;
  s.diffusion.sigma_x = 1.0;
  s.diffusion.sigma_y = 2.0;
  s.seed = 9;
  const LatentPath p = simulate_latent(s);
  for (std::size_t k = 0; k < p.x.size(); ++k) CHECK(p.y[k] == 2.0 * p.x[k]);

  s.diffusion.sigma_x = 0.7;
  s.diffusion.sigma_y = 1.3;
  s.diffusion.mu_x = 0.4;
  s.diffusion.mu_y = -0.2;
  const LatentPath q = simulate_latent(s);
  for (std::size_t k = 0; k < q.x.size(); ++k) {
    const double t = static_cast<double>(k) * q.dt;
    CHECK(q.y[k] + 0.2 * t == doctest::Approx((1.3 / 0.7) * (q.x[k] - 0.4 * t)).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("terminal variance matches sigma^2 T") {
  ScenarioSpec s = small_spec(50);
  s.diffusion.sigma_x = 0.2;
  s.diffusion.sigma_y = 0.1;
  s.sampling.horizon = 2.0;
  const int reps = 200;
  V sq;
  for (int r = 0; r < reps; ++r) {
    s.seed = replication_seed(11, static_cast<std::uint64_t>(r));
    const LatentPath p = simulate_latent(s);
    sq.push_back(p.x.back() * p.x.back());
  }
  const double mean = std::accumulate(sq.begin(), sq.end(), 0.0) / reps;
  double var = 0.0;
  for (double v : sq) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / (reps - 1) / reps);
  CHECK(std::abs(mean - 0.04 * 2.0) < 3.0 * se);
}

TEST_CASE("Poisson tick counts") {
  SamplingSpec s;
  s.n_scale = 1000;
  const int reps = 500;
  V counts;
  int inside = 0;
  for (int r = 0; r < reps; ++r) {
    const auto [a, b] = sample_times(s, replication_seed(21, static_cast<std::uint64_t>(r)));
    const double c = static_cast<double>(a.size() - 1);
    counts.push_back(c);
    if (std::abs(c - 1000.0) <= 3.0 * std::sqrt(1000.0)) ++inside;
    CHECK(a[0] == 0.0);
    CHECK(b[0] == 0.0);
    CHECK(a.back() <= 1.0);
  }
  const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / reps;
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= reps - 1;
  CHECK(std::abs(mean - 1000.0) < 3.0 * std::sqrt(1000.0 / reps));
  // dispersion index of a Poisson count is 1; its sampling sd is about sqrt(2 / reps)
  CHECK(std::abs(var / 1000.0 - 1.0) < 3.0 * std::sqrt(2.0 / reps));
  CHECK(inside >= static_cast<int>(0.99 * reps));
}

TEST_CASE("a degenerate change point matches plain Poisson sampling") {
  SamplingSpec plain;
  plain.n_scale = 500;
  SamplingSpec cp = plain;
  cp.mode = SamplingMode::poisson_changepoint;
  cp.p1_bar = cp.p1;
  cp.p2_bar = cp.p2;
  cp.tau1 = 0.37;
  cp.tau2 = 0.61;
  V a;
  V b;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const auto da = gaps(sample_times(plain, replication_seed(1, r)).first);
    const auto db = gaps(sample_times(cp, replication_seed(2, r)).first);
    a.insert(a.end(), da.begin(), da.end());
    b.insert(b.end(), db.begin(), db.end());
  }
  CHECK(ks_pvalue(a, b) > 0.01);
}

TEST_CASE("change point switches the arrival rate") {
  SamplingSpec cp;
  cp.mode = SamplingMode::poisson_changepoint;
  cp.n_scale = 1000;
  cp.p1 = 0.5;
  cp.p1_bar = 2.0;
  cp.tau1 = 0.5;
  double before = 0.0;
  double after = 0.0;
  for (std::uint64_t r = 0; r < 50; ++r) {
    const auto s = sample_times(cp, replication_seed(3, r)).first;
    for (std::size_t k = 1; k < s.size(); ++k) (s[k] < 0.5 ? before : after) += 1.0;
  }
  CHECK(before / 50.0 == doctest::Approx(250.0).epsilon(0.05));
  CHECK(after / 50.0 == doctest::Approx(1000.0).epsilon(0.05));
}

TEST_CASE("regular designs with an offset interleave strictly") {
  SamplingSpec s;
  s.mode = SamplingMode::regular;
  s.n_scale = 100;
  s.offset = 0.005;
  const auto [a, b] = sample_times(s, 0);
  CHECK(a.size() == 101);
  CHECK(b.size() == 101);
  for (std::size_t k = 1; k + 1 < b.size(); ++k) {
    CHECK(b[k] < a[k]);
    CHECK(a[k] < b[k + 1]);
  }
}

TEST_CASE("empty designs are rejected") {
  SamplingSpec s;
  s.n_scale = 1;
  s.p1 = 1e-9;
  CHECK_THROWS_AS(sample_times(s, 0), std::runtime_error);
}

TEST_CASE("noise-free observation returns latent values") {
  ScenarioSpec s = small_spec();
  s.seed = 5;
  const LatentPath p = simulate_latent(s);
  const auto [sd, td] = sample_times(s.sampling, s.seed);
  const auto [x, y] = observe(p, sd, td, s);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(x.values()[k] == p.x[p.nearest(sd[k])]);
  for (std::size_t k = 0; k < y.size(); ++k) CHECK(y.values()[k] == p.y[p.nearest(td[k])]);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(sd[k] - p.nearest(sd[k]) * p.dt) <= 0.5 * p.dt + 1e-15);

  LatentPath short_path = p;
  short_path.x.resize(10);
  short_path.y.resize(10);
  CHECK_THROWS_AS(observe(short_path, sd, td, s), std::invalid_argument);
}

TEST_CASE("rounding noise") {
  ScenarioSpec s = small_spec();
  s.noise.mode = NoiseMode::rounding;
  s.noise.gamma_x = s.noise.gamma_y = 0.01;
  s.seed = 6;
  const LatentPath p = simulate_latent(s);
  const auto [sd, td] = sample_times(s.sampling, s.seed);
  const auto [x, y] = observe(p, sd, td, s);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double v = x.values()[k];
    CHECK(std::abs(v / 0.01 - std::round(v / 0.01)) < 1e-9);
    CHECK(std::abs(v - p.x[p.nearest(sd[k])]) <= 0.01 * (1.0 + 1e-12));
  }
}

TEST_CASE("rounding error is centred at a fixed latent value") {
  const double gamma = 0.01;
  const double level = 0.377 * gamma + 3.0;
  ScenarioSpec s = small_spec(10);
  s.noise.mode = NoiseMode::rounding;
  s.noise.gamma_x = s.noise.gamma_y = gamma;
  LatentPath flat;
  flat.dt = 1.0;
  flat.x = V{level, level};
  flat.y = V{level, level};
  V times;
  for (int k = 0; k < 2000; ++k) times.push_back(k * 5e-4);
  const SamplingDesign d(times);
  double sum = 0.0;
  double sq = 0.0;
  std::size_t n = 0;
  for (std::uint64_t r = 0; r < 10; ++r) {
    s.seed = r;
    const TickSeries x = observe(flat, d, d, s).first;
    for (double v : x.values()) {
      sum += v - level;
      sq += (v - level) * (v - level);
      ++n;
    }
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / (n - 1));
  CHECK(std::abs(mean) < 3.0 * se);
}

TEST_CASE("rounding kernel is centred") {
  const double gamma = 0.01;
  for (double frac : {0.0, 1.0 / 3.0, 0.5, 0.77, 0.123, 0.999}) {
    const double x = frac * gamma + 0.25;
    const RoundingKernel k = rounding_kernel(x, gamma);
    CAPTURE(frac);
    CHECK(k.prob_far + k.prob_near == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(k.mean()) < 1e-10);
    CHECK(std::abs(k.value_far) <= gamma);
    CHECK(std::abs(k.value_near) <= gamma / 2 + 1e-15);

    // piecewise-exact integral over the dither u in [-gamma/2, gamma/2] of
    // gamma round((x + u) / gamma) - x
    const double lo = x - gamma / 2;
    const double a = round_half_up(lo / gamma);
    const double split = (a + 0.5) * gamma - x;  // jump of the integrand
    const double w1 = std::clamp(split + gamma / 2, 0.0, gamma) / gamma;
    const double integral = w1 * (a * gamma - x) + (1.0 - w1) * ((a + 1.0) * gamma - x);
    CHECK(std::abs(integral) < 1e-10);
  }
  CHECK_THROWS_AS(rounding_kernel(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("round_half_up") {
  CHECK(round_half_up(0.5) == 1.0);
  CHECK(round_half_up(-0.5) == 0.0);
  CHECK(round_half_up(1.49) == 1.0);
  CHECK(round_half_up(-1.51) == -2.0);
}

TEST_CASE("endogenous noise variance does not grow with n") {
  // The term sqrt(n) phi (X_{S^i} - X_{S^{i-1}}) has variance n phi^2 sigma^2
  // E[dS] = phi^2 sigma^2 / p, which is flat in n; the log-variance slope is
  // therefore near 0 rather than 1.
  V log_n;
  V log_var;
  for (std::uint64_t n : {500, 2000, 8000}) {
    ScenarioSpec s = small_spec(n);
    s.diffusion.phi_x = 0.3;
    double sq = 0.0;
    std::size_t count = 0;
    for (std::uint64_t r = 0; r < 10; ++r) {
      s.seed = replication_seed(13, r);
      const LatentPath p = simulate_latent(s);
      const auto [sd, td] = sample_times(s.sampling, s.seed);
      const auto x = observe(p, sd, td, s).first;
      for (std::size_t k = 1; k < x.size(); ++k) {
        const double u = x.values()[k] - p.x[p.nearest(sd[k])];
        sq += u * u;
        ++count;
      }
    }
    log_n.push_back(std::log(static_cast<double>(n)));
    log_var.push_back(std::log(sq / count));
  }
  CHECK(std::abs(ols_slope(log_n, log_var)) < 0.15);
  CHECK(std::exp(log_var.back()) == doctest::Approx(0.09).epsilon(0.1));
}

TEST_CASE("true_ic") {
  DiffusionSpec d;
  CHECK(true_ic(d, 3.0) == 0.0);
  d.rho = 0.5;
  CHECK(true_ic(d, 1.0) == 0.5);
  d.sigma_x = 2.0;
  d.sigma_y = 0.3;
  CHECK(true_ic(d, 0.7) + true_ic(d, 1.1) == doctest::Approx(true_ic(d, 1.8)).epsilon(1e-15));
  CHECK_THROWS_AS(true_ic(d, -1.0), std::invalid_argument);
}
