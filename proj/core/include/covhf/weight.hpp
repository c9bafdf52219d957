#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "covhf/sync.hpp"

namespace covhf {

/// Selects g or g' as an argument of the psi kernels.
enum class WeightFn { g, g_prime };

/// Kernel integrals of a weight function.
///   kappa       = int_{-2}^{2} psi_{g,g}(x)^2 dx
///   kappa_tilde = int_{-2}^{2} psi_{g',g'}(x)^2 dx
///   kappa_bar   = int_{-2}^{2} psi_{g,g'}(x)^2 dx
///   psi_hy      = int_0^1 g(x) dx
struct KernelConstants {
  double kappa = 0.0;
  double kappa_tilde = 0.0;
  double kappa_bar = 0.0;
  double psi_hy = 0.0;
};

inline constexpr int kDefaultQuadPoints = 64;

/// Pre-averaging weight g on [0,1] with g(0) = g(1) = 0, extended by zero
/// (together with g') outside [0,1].
///
/// `kinks` lists the interior points of (0,1) where g' may jump. Integrals of
/// g and g' are split there and evaluated with Gauss-Legendre on each smooth
/// cell, so piecewise-polynomial weights integrate exactly.
///
/// The scheme is immutable; copies share one lazily computed, thread-safe
/// KernelConstants cache.
class WeightScheme {
 public:
  using Fn = std::function<double(double)>;

  WeightScheme(std::string name, Fn g, Fn g_prime, std::vector<double> kinks,
               int quad_points = kDefaultQuadPoints);

  /// g(x) = min(x, 1 - x). g' is +1 on [0, 1/2) and -1 on [1/2, 1].
  static WeightScheme triangular(int quad_points = kDefaultQuadPoints);

  const std::string& name() const;
  int quad_points() const;
  std::span<const double> kinks() const;

  double g(double x) const;
  double g_prime(double x) const;
  double eval(WeightFn which, double x) const;

  /// int_0^y f(v) dv for f = g or g' (y is clamped to [0,1]).
  double primitive(WeightFn which, double y) const;

  /// Same scheme at a different quadrature resolution (fresh cache).
  WeightScheme with_quad_points(int quad_points) const;

  /// Cached kernel_constants(*this).
  const KernelConstants& constants() const;

 private:
  struct State;
  std::shared_ptr<const State> state_;
};

double eval_g(const WeightScheme& scheme, double x);

/// psi_{a,b}(x) = int_0^1 int_{x+u-1}^{x+u+1} a(u) b(v) dv du.
/// The outer integral is composite Gauss-Legendre on cells of width
/// 1/quad_points, split where a(u) or the primitive of b may kink; the inner
/// one is the primitive of b. Exactly 0 for |x| >= 2.
double psi_kernel(const WeightScheme& scheme, WeightFn alpha, WeightFn beta, double x);

/// int_{-2}^{2} psi_{a,b}(x) psi_{c,d}(x) dx, composite Gauss-Legendre split at
/// the kinks of both kernels.
double psi_product_integral(const WeightScheme& scheme, WeightFn a, WeightFn b, WeightFn c, WeightFn d);

/// Fresh (uncached) evaluation. Throws std::domain_error when psi_hy vanishes.
KernelConstants kernel_constants(const WeightScheme& scheme);

struct DiscreteCoeffs {
  std::vector<double> g;   ///< g(p/kn), p = 0..kn-1
  std::vector<double> dg;  ///< g((p+1)/kn) - g(p/kn), p = 0..kn-1
};

/// Throws std::invalid_argument for kn < 2.
DiscreteCoeffs discrete_coeffs(const WeightScheme& scheme, std::size_t kn);

/// (1/kn) sum_{p=1}^{kn-1} g(p/kn), the finite-sample replacement of psi_hy.
double adjusted_psi(const WeightScheme& scheme, std::size_t kn);

/// c_{a,b}(p,q) = kn^-2 sum_{i=(p-kn+1) v 1}^{p} sum_{j=(q-kn+1) v 1}^{q}
///                a_arr[p-i] b_arr[q-j] Kbar(i,j)
/// with kn = a_arr.size() = b_arr.size() = overlap.kn(). Requires p, q >= 1
/// inside the overlap range; throws std::out_of_range otherwise.
double discrete_c(std::span<const double> alpha_arr, std::span<const double> beta_arr,
                  const OverlapOracle& overlap, std::size_t p, std::size_t q);

}  // namespace covhf
