#pragma once

// Yukawa interaction between two layered parallel plates: the effective
// density factor of a coated body, the pressure and the energy per unit area.

#include <cmath>
#include <string>
#include <vector>

#include "core.hpp"

namespace yukawa {

/// Exponential attenuation e^{-x} for x >= 0, flushed to exactly zero before
/// the result turns subnormal.
inline double attenuation(double x) {
  constexpr double underflow_exponent = 700.0;
  return x > underflow_exponent ? 0.0 : std::exp(-x);
}

namespace detail {

/// One density step of a coating stack: the depth of the interface below the
/// outer surface and the density jump (upper minus lower) across it.
struct Interface {
  double depth;
  double jump;
};

/// Interfaces of the stack, skipping zero-thickness layers (they occupy no
/// volume). The last entry is the step onto the substrate.
inline std::vector<Interface> interfaces(const LayeredBody& body, double& top_density) {
  std::vector<Interface> out;
  out.reserve(body.layers.size());
  double depth = 0.0;
  bool have_top = false;
  double upper = 0.0;
  for (const auto& l : body.layers) {
    if (l.thickness == 0.0) continue;
    if (!have_top) {
      top_density = upper = l.density;
      have_top = true;
    } else {
      out.push_back({depth, upper - l.density});
      upper = l.density;
    }
    depth += l.thickness;
  }
  if (!have_top) {
    top_density = body.substrate_density;
    return out;
  }
  out.push_back({depth, upper - body.substrate_density});
  return out;
}

}  // namespace detail

/// Which plate-side substrate bracket to use: the semi-infinite one of the
/// plate-plate pressure formula, or the finite-thickness one honouring the
/// configured substrate thickness.
enum class PlateVariant { semi_infinite, finite };

/// Effective Yukawa source density of a layered body, kg/m^3:
///   rho_1 - sum_i (rho_i - rho_{i+1}) e^{-(Delta_1 + ... + Delta_i)/lambda}
/// and, for a finite substrate of thickness D, an extra
///   - rho_sub e^{-(sum Delta + D)/lambda}.
inline double plate_factor(const LayeredBody& body, double lambda,
                           PlateVariant variant = PlateVariant::finite) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  double value = 0.0;
  const auto steps = detail::interfaces(body, value);
  for (const auto& s : steps) value -= s.jump * attenuation(s.depth / lambda);
  if (variant == PlateVariant::finite && body.substrate_thickness) {
    const double bottom = body.coating_thickness() + *body.substrate_thickness;
    value -= body.substrate_density * attenuation(bottom / lambda);
  }
  return value;
}

/// The sphere side of the plate-plate formulas: the sphere coating on a
/// semi-infinite core.
inline LayeredBody sphere_as_semispace(const SphereGeometry& sphere) {
  LayeredBody body = sphere.coating;
  body.substrate_thickness = semi_infinite;
  return body;
}

namespace detail {

inline void require_separation(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("separation must be positive");
}

/// -2 pi G lambda^2 e^{-a/lambda} F_s F_p, i.e. the pressure at alpha = 1.
inline double unit_pressure(const ExperimentConfig& cfg, double lambda, double a,
                            PlateVariant variant) {
  require_separation(a);
  const double fs = plate_factor(sphere_as_semispace(cfg.sphere), lambda);
  const double fp = plate_factor(cfg.plate, lambda, variant);
  return -2.0 * pi * cfg.constants.G * lambda * lambda * attenuation(a / lambda) * fs * fp;
}

}  // namespace detail

/// Yukawa pressure between the sphere-side semispace and the plate, Pa.
/// Negative means attraction.
inline double yukawa_pressure(const ExperimentConfig& cfg, const YukawaParams& p, double a,
                              PlateVariant variant = PlateVariant::semi_infinite) {
  return p.alpha * detail::unit_pressure(cfg, p.lambda, a, variant);
}

/// Yukawa energy per unit area, J/m^2. Equal to lambda * pressure, so that
/// the pressure is -dE/da.
inline double yukawa_energy_per_area(const ExperimentConfig& cfg, const YukawaParams& p,
                                     double a,
                                     PlateVariant variant = PlateVariant::semi_infinite) {
  return p.alpha * (p.lambda * detail::unit_pressure(cfg, p.lambda, a, variant));
}

}  // namespace yukawa
