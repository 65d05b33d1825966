#pragma once

// Yukawa force between a coated sphere and a layered plate, exact and in the
// proximity-force (PFA) form, plus the separation gradient the oscillator
// experiment actually constrains.

#include <array>
#include <cmath>
#include <string_view>

#include "core.hpp"
#include "planar.hpp"

namespace yukawa {

enum class PhiMode { exact, pfa };

inline constexpr std::string_view to_string(PhiMode m) {
  return m == PhiMode::exact ? "exact" : "pfa";
}

namespace detail {

/// Below this r/lambda the closed form of phi cancels catastrophically and
/// the power series is used instead.
inline constexpr double phi_series_switch = 0.01;

/// phi / lambda = sum_{n>=3} c_n x^n with c_n = (-2)^{n-1} (n-2) / n!.
/// Twelve terms leave a truncation error far below double precision for
/// x < 0.01.
template <typename Real>
Real phi_series(Real r, Real lambda) {
  const Real x = r / lambda;
  Real coeff = Real(2) / Real(3);  // c_3
  Real power = x * x * x;
  Real sum = coeff * power;
  for (int n = 3; n < 15; ++n) {
    coeff *= Real(-2 * (n - 1)) / Real((n + 1) * (n - 2));
    power *= x;
    sum += coeff * power;
  }
  return lambda * sum;
}

/// Closed form r - lambda + (r + lambda) e^{-2r/lambda}, rearranged with
/// expm1 to keep the small-x cancellation at the level of one ulp of 2x.
inline double phi_closed(double r, double lambda) {
  const double x = r / lambda;
  if (x > 2.0) return r - lambda + (r + lambda) * attenuation(2.0 * x);
  return lambda * ((x + 1.0) * std::expm1(-2.0 * x) + 2.0 * x);
}

}  // namespace detail

/// Geometry function of the exact sphere-plate Yukawa force:
///   Phi(r, lambda) = r - lambda + (r + lambda) e^{-2r/lambda},
/// i.e. int_0^{2r} t (2r - t) e^{-t/lambda} dt / (2 lambda^2).
/// In PFA mode every Phi value is replaced by the sphere radius R.
inline double phi(double r, double lambda, PhiMode mode, double R) {
  if (!(r > 0.0)) throw DomainError("phi: r must be positive");
  if (!(lambda > 0.0)) throw DomainError("phi: lambda must be positive");
  if (mode == PhiMode::pfa) return R;
  if (r / lambda < detail::phi_series_switch) return detail::phi_series(r, lambda);
  return detail::phi_closed(r, lambda);
}

inline double phi_exact(double r, double lambda) { return phi(r, lambda, PhiMode::exact, r); }

/// Sphere bracket of the sphere-plate force, kg/m^2:
///   rho_1 Phi(R) - sum_i (rho_i - rho_{i+1}) Phi(R - Delta_1..i) e^{-Delta_1..i/lambda}.
/// In PFA mode this is R times the sphere's semispace density factor.
inline double sphere_factor(const SphereGeometry& sphere, double lambda, PhiMode mode) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  const double R = sphere.radius;
  if (mode == PhiMode::pfa) return R * plate_factor(sphere_as_semispace(sphere), lambda);

  double top = 0.0;
  const auto steps = detail::interfaces(sphere.coating, top);
  double value = top * phi_exact(R, lambda);
  for (const auto& s : steps) {
    const double w = attenuation(s.depth / lambda);
    if (w == 0.0 || s.jump == 0.0) continue;
    value -= s.jump * phi_exact(R - s.depth, lambda) * w;
  }
  return value;
}

namespace detail {

/// Sphere-plate force at alpha = 1.
inline double unit_force(const ExperimentConfig& cfg, double lambda, double a, PhiMode mode) {
  require_separation(a);
  const double s = sphere_factor(cfg.sphere, lambda, mode);
  const double fp = plate_factor(cfg.plate, lambda, PlateVariant::finite);
  return -4.0 * pi * pi * cfg.constants.G * lambda * lambda * lambda * attenuation(a / lambda) *
         s * fp;
}

}  // namespace detail

/// Yukawa force on the sphere, N. Negative means attraction.
inline double sphere_plate_force(const ExperimentConfig& cfg, const YukawaParams& p, double a,
                                 PhiMode mode) {
  return p.alpha * detail::unit_force(cfg, p.lambda, a, mode);
}

/// dF/da, N/m. The separation enters only through e^{-a/lambda}, so the
/// derivative is -F/lambda.
inline double force_gradient(const ExperimentConfig& cfg, const YukawaParams& p, double a,
                             PhiMode mode) {
  return -sphere_plate_force(cfg, p, a, mode) / p.lambda;
}

/// |dF/da| / (2 pi R), Pa.
inline double effective_pressure(const ExperimentConfig& cfg, const YukawaParams& p, double a,
                                 PhiMode mode) {
  return std::abs(force_gradient(cfg, p, a, mode)) / (2.0 * pi * cfg.sphere.radius);
}

}  // namespace yukawa
