#include "covhf/weight.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "covhf/summation.hpp"

namespace covhf {

namespace {

// 5-point Gauss-Legendre on [-1, 1]; exact for polynomials of degree <= 9.
constexpr std::array<double, 5> kGlNodes = {0.0, -0.5384693101056830910, 0.5384693101056830910,
                                            -0.9061798459386639928, 0.9061798459386639928};
constexpr std::array<double, 5> kGlWeights = {0.5688888888888888889, 0.4786286704993664680,
                                              0.4786286704993664680, 0.2369268850561890875,
                                              0.2369268850561890875};

template <class F>
double gauss_legendre(const F& f, double a, double b) {
  if (!(b > a)) return 0.0;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t k = 0; k < kGlNodes.size(); ++k) s += kGlWeights[k] * f(mid + half * kGlNodes[k]);
  return half * s;
}

}  // namespace

struct WeightScheme::State {
  std::string name;
  Fn g;
  Fn g_prime;
  std::vector<double> kinks;
  int quad_points = kDefaultQuadPoints;

  // Cell boundaries: the uniform grid j/M merged with the kinks.
  std::vector<double> nodes;
  std::vector<double> prim_g;
  std::vector<double> prim_gp;

  mutable std::once_flag constants_once;
  mutable KernelConstants constants;

  double eval(WeightFn which, double x) const {
    if (x < 0.0 || x > 1.0) return 0.0;
    return which == WeightFn::g ? g(x) : g_prime(x);
  }

  double primitive(WeightFn which, double y) const {
    const auto& table = which == WeightFn::g ? prim_g : prim_gp;
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return table.back();
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), y);
    const std::size_t k = static_cast<std::size_t>(it - nodes.begin()) - 1;
    return table[k] + gauss_legendre([&](double v) { return eval(which, v); }, nodes[k], y);
  }
};

WeightScheme::WeightScheme(std::string name, Fn g, Fn g_prime, std::vector<double> kinks,
                           int quad_points) {
  if (!g || !g_prime) throw std::invalid_argument("WeightScheme: g and g' are required");
  if (quad_points < 2) throw std::invalid_argument("WeightScheme: quad_points must be >= 2");
  auto st = std::make_shared<State>();
  st->name = std::move(name);
  st->g = std::move(g);
  st->g_prime = std::move(g_prime);
  st->quad_points = quad_points;
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  for (double k : kinks) {
    if (!(k > 0.0 && k < 1.0)) throw std::invalid_argument("WeightScheme: kinks must lie in (0,1)");
  }
  st->kinks = std::move(kinks);

  constexpr double kEndpointTol = 1e-12;
  if (std::abs(st->g(0.0)) > kEndpointTol || std::abs(st->g(1.0)) > kEndpointTol) {
    throw std::invalid_argument("WeightScheme: g must vanish at 0 and 1");
  }

  const auto m = static_cast<std::size_t>(quad_points);
  st->nodes.reserve(m + 1 + st->kinks.size());
  for (std::size_t j = 0; j <= m; ++j) st->nodes.push_back(static_cast<double>(j) / static_cast<double>(m));
  st->nodes.insert(st->nodes.end(), st->kinks.begin(), st->kinks.end());
  std::sort(st->nodes.begin(), st->nodes.end());
  st->nodes.erase(std::unique(st->nodes.begin(), st->nodes.end()), st->nodes.end());

  auto build = [&](WeightFn which, std::vector<double>& table) {
    table.assign(st->nodes.size(), 0.0);
    Neumaier acc;
    for (std::size_t k = 1; k < st->nodes.size(); ++k) {
      acc += gauss_legendre([&](double v) { return st->eval(which, v); }, st->nodes[k - 1],
                            st->nodes[k]);
      table[k] = acc.value();
    }
  };
  build(WeightFn::g, st->prim_g);
  build(WeightFn::g_prime, st->prim_gp);
  state_ = std::move(st);
}

WeightScheme WeightScheme::triangular(int quad_points) {
  return WeightScheme(
      "triangular", [](double x) { return std::min(x, 1.0 - x); },
      [](double x) { return x < 0.5 ? 1.0 : -1.0; }, {0.5}, quad_points);
}

const std::string& WeightScheme::name() const { return state_->name; }
int WeightScheme::quad_points() const { return state_->quad_points; }
std::span<const double> WeightScheme::kinks() const { return state_->kinks; }

double WeightScheme::g(double x) const { return state_->eval(WeightFn::g, x); }
double WeightScheme::g_prime(double x) const { return state_->eval(WeightFn::g_prime, x); }
double WeightScheme::eval(WeightFn which, double x) const { return state_->eval(which, x); }

double WeightScheme::primitive(WeightFn which, double y) const {
  return state_->primitive(which, y);
}

WeightScheme WeightScheme::with_quad_points(int quad_points) const {
  return WeightScheme(state_->name, state_->g, state_->g_prime, state_->kinks, quad_points);
}

const KernelConstants& WeightScheme::constants() const {
  std::call_once(state_->constants_once,
                 [this] { state_->constants = kernel_constants(*this); });
  return state_->constants;
}

double eval_g(const WeightScheme& scheme, double x) { return scheme.g(x); }

namespace {

// Sorted, deduplicated cell boundaries on [lo, hi]: a uniform grid with
// `per_unit` cells per unit length merged with the points in `extra`.
std::vector<double> cells(double lo, double hi, int per_unit, const std::vector<double>& extra) {
  std::vector<double> pts;
  const auto n = static_cast<long>(std::ceil((hi - lo) * per_unit));
  for (long k = 0; k <= n; ++k) pts.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n));
  for (double e : extra) {
    if (e > lo && e < hi) pts.push_back(e);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// 0, the kinks, 1.
std::vector<double> breaks(const WeightScheme& scheme) {
  std::vector<double> b{0.0};
  b.insert(b.end(), scheme.kinks().begin(), scheme.kinks().end());
  b.push_back(1.0);
  return b;
}

// Points where psi_{a,b}(x) may lose smoothness: x = v - u + d with u, v
// breaks of the weight and d in {-1, 0, 1}.
std::vector<double> psi_breaks(const WeightScheme& scheme) {
  const auto b = breaks(scheme);
  std::vector<double> out;
  for (double u : b) {
    for (double v : b) {
      for (double d : {-1.0, 0.0, 1.0}) out.push_back(v - u + d);
    }
  }
  return out;
}

}  // namespace

double psi_kernel(const WeightScheme& scheme, WeightFn alpha, WeightFn beta, double x) {
  if (!(std::abs(x) < 2.0)) return 0.0;
  // The integrand is smooth between the breaks of alpha(u) and those of
  // beta's primitive at x + u - 1 and x + u + 1.
  std::vector<double> extra;
  for (double b : breaks(scheme)) {
    extra.push_back(b);
    extra.push_back(b - x - 1.0);
    extra.push_back(b - x + 1.0);
  }
  const auto pts = cells(0.0, 1.0, scheme.quad_points(), extra);
  auto f = [&](double u) {
    return scheme.eval(alpha, u) * (scheme.primitive(beta, x + u + 1.0) - scheme.primitive(beta, x + u - 1.0));
  };
  Neumaier acc;
  for (std::size_t k = 1; k < pts.size(); ++k) acc += gauss_legendre(f, pts[k - 1], pts[k]);
  return acc.value();
}

double psi_product_integral(const WeightScheme& scheme, WeightFn a, WeightFn b, WeightFn c, WeightFn d) {
  const auto pts = cells(-2.0, 2.0, scheme.quad_points(), psi_breaks(scheme));
  auto f = [&](double x) { return psi_kernel(scheme, a, b, x) * psi_kernel(scheme, c, d, x); };
  Neumaier acc;
  for (std::size_t k = 1; k < pts.size(); ++k) acc += gauss_legendre(f, pts[k - 1], pts[k]);
  return acc.value();
}

KernelConstants kernel_constants(const WeightScheme& scheme) {
  KernelConstants c;
  c.psi_hy = scheme.primitive(WeightFn::g, 1.0);
  if (std::abs(c.psi_hy) < 1e-12) {
    throw std::domain_error("kernel_constants: integral of g vanishes");
  }
  using F = WeightFn;
  c.kappa = psi_product_integral(scheme, F::g, F::g, F::g, F::g);
  c.kappa_tilde = psi_product_integral(scheme, F::g_prime, F::g_prime, F::g_prime, F::g_prime);
  c.kappa_bar = psi_product_integral(scheme, F::g, F::g_prime, F::g, F::g_prime);
  return c;
}

DiscreteCoeffs discrete_coeffs(const WeightScheme& scheme, std::size_t kn) {
  if (kn < 2) throw std::invalid_argument("discrete_coeffs: kn must be at least 2");
  DiscreteCoeffs out;
  out.g.resize(kn);
  out.dg.resize(kn);
  const double k = static_cast<double>(kn);
  for (std::size_t p = 0; p < kn; ++p) {
    const double lo = scheme.g(static_cast<double>(p) / k);
    const double hi = scheme.g(static_cast<double>(p + 1) / k);
    out.g[p] = lo;
    out.dg[p] = hi - lo;
  }
  return out;
}

double adjusted_psi(const WeightScheme& scheme, std::size_t kn) {
  if (kn < 2) throw std::invalid_argument("adjusted_psi: kn must be at least 2");
  const double k = static_cast<double>(kn);
  double s = 0.0;
  for (std::size_t p = 1; p < kn; ++p) s += scheme.g(static_cast<double>(p) / k);
  return s / k;
}

double discrete_c(std::span<const double> alpha_arr, std::span<const double> beta_arr,
                  const OverlapOracle& overlap, std::size_t p, std::size_t q) {
  const std::size_t kn = overlap.kn();
  if (alpha_arr.size() != kn || beta_arr.size() != kn) {
    throw std::invalid_argument("discrete_c: coefficient arrays must have kn entries");
  }
  if (p < 1 || q < 1 || p >= overlap.rows() || q >= overlap.cols()) {
    throw std::out_of_range("discrete_c: (p, q) outside the design range");
  }
  // prefix[r] = beta_arr[0] + ... + beta_arr[r-1]
  std::vector<double> prefix(kn + 1, 0.0);
  for (std::size_t r = 0; r < kn; ++r) prefix[r + 1] = prefix[r] + beta_arr[r];

  const std::size_t i_lo = p + 1 > kn ? p + 1 - kn : 1;
  const std::size_t j_lo_all = std::max<std::size_t>(q + 1 > kn ? q + 1 - kn : 1, 1);
  double s = 0.0;
  for (std::size_t i = std::max<std::size_t>(i_lo, 1); i <= p; ++i) {
    const IndexRange& row = overlap.row(i);
    const std::size_t jl = std::max(row.begin, j_lo_all);
    const std::size_t jh = std::min(row.end, q + 1);  // exclusive
    if (jh <= jl) continue;
    // sum_{j=jl}^{jh-1} beta[q-j] = sum over r in [q-jh+1, q-jl]
    s += alpha_arr[p - i] * (prefix[q - jl + 1] - prefix[q + 1 - jh]);
  }
  const double k = static_cast<double>(kn);
  return s / (k * k);
}

}  // namespace covhf
