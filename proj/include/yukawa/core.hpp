#pragma once

// Physical constants, geometry/material descriptions and the JSON
// experiment-config schema. Internal representation is strict SI; the config
// file carries lengths in nanometres and densities in kg/m^3.

#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace yukawa {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Input text could not be parsed or is missing a required field.
class MalformedInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a physical or geometric invariant.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The constraint inversion has no finite answer at this point (the Yukawa
/// signal underflows to zero).
class DegenerateConstraint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Units
// ---------------------------------------------------------------------------

namespace units {
inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;
inline constexpr double mPa = 1e-3;
}  // namespace units

inline constexpr double pi = 3.141592653589793238462643383279502884;

/// CODATA 2006 Newtonian constant of gravitation, m^3 kg^-1 s^-2.
inline constexpr double G_codata2006 = 6.67428e-11;

struct PhysicalConstants {
  double G = G_codata2006;
};

// ---------------------------------------------------------------------------
// Geometry and materials
// ---------------------------------------------------------------------------

struct Layer {
  double thickness = 0.0;  ///< m
  double density = 0.0;    ///< kg/m^3

  bool operator==(const Layer&) const = default;
};

/// Thickness of a substrate; an empty optional means a semi-infinite base.
using SubstrateThickness = std::optional<double>;
inline constexpr std::nullopt_t semi_infinite = std::nullopt;

/// Coating stack (outermost layer, facing the gap, first) on a substrate.
struct LayeredBody {
  std::vector<Layer> layers;
  double substrate_density = 0.0;
  SubstrateThickness substrate_thickness = semi_infinite;

  [[nodiscard]] double coating_thickness() const {
    return std::accumulate(layers.begin(), layers.end(), 0.0,
                           [](double s, const Layer& l) { return s + l.thickness; });
  }
  [[nodiscard]] bool is_semi_infinite() const { return !substrate_thickness.has_value(); }
  [[nodiscard]] double outer_density() const {
    return layers.empty() ? substrate_density : layers.front().density;
  }

  bool operator==(const LayeredBody&) const = default;
};

/// Coated sphere. The coating's substrate is the sphere core; its thickness
/// field is ignored (the core fills the remaining radius).
struct SphereGeometry {
  double radius = 0.0;  ///< m
  LayeredBody coating;

  bool operator==(const SphereGeometry&) const = default;
};

struct YukawaParams {
  double alpha = 0.0;   ///< dimensionless strength
  double lambda = 0.0;  ///< interaction range, m
};

struct ExperimentConfig {
  PhysicalConstants constants;
  SphereGeometry sphere;
  LayeredBody plate;
  double separation_min = 0.0;  ///< m
  double separation_max = 0.0;  ///< m
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

inline void check_layers(const LayeredBody& body, std::string_view what) {
  for (const auto& l : body.layers) {
    if (!std::isfinite(l.thickness) || l.thickness < 0.0)
      throw DomainError(std::string(what) + ": layer thickness must be finite and >= 0");
    if (!std::isfinite(l.density) || l.density < 0.0)
      throw DomainError(std::string(what) + ": layer density must be finite and >= 0");
  }
  if (!std::isfinite(body.substrate_density) || body.substrate_density < 0.0)
    throw DomainError(std::string(what) + ": substrate density must be finite and >= 0");
  if (body.substrate_thickness &&
      (!std::isfinite(*body.substrate_thickness) || *body.substrate_thickness < 0.0))
    throw DomainError(std::string(what) + ": substrate thickness must be finite and >= 0");
}

}  // namespace detail

/// Throws DomainError on the first violated invariant.
inline void validate(const ExperimentConfig& cfg) {
  if (!(cfg.constants.G > 0.0) || !std::isfinite(cfg.constants.G))
    throw DomainError("G must be positive");
  if (!(cfg.sphere.radius > 0.0) || !std::isfinite(cfg.sphere.radius))
    throw DomainError("sphere radius must be positive");
  detail::check_layers(cfg.sphere.coating, "sphere");
  detail::check_layers(cfg.plate, "plate");
  if (!(cfg.sphere.coating.coating_thickness() < cfg.sphere.radius))
    throw DomainError("sphere coating is not thinner than the sphere radius");
  if (!(cfg.separation_min > 0.0) || !(cfg.separation_min < cfg.separation_max) ||
      !std::isfinite(cfg.separation_max))
    throw DomainError("separation range must satisfy 0 < min < max");
}

/// Threshold above which a / R, lambda / R (or lambda / D) no longer counts as
/// "much smaller".
inline constexpr double regime_ratio_limit = 0.1;

/// Applicability warnings for the proximity-force treatment at (a, lambda).
/// Never throws.
inline std::vector<std::string> validate_regime(const ExperimentConfig& cfg, double a,
                                                double lambda) {
  std::vector<std::string> warnings;
  const double R = cfg.sphere.radius;
  auto ratio_note = [](std::string_view name, double r) {
    return std::string(name) + " = " + std::to_string(r) + " exceeds " +
           std::to_string(regime_ratio_limit);
  };
  if (!(a > 0.0) || !(lambda > 0.0)) {
    warnings.emplace_back("separation and range must be positive");
    return warnings;
  }
  if (a / R > regime_ratio_limit) warnings.push_back(ratio_note("a/R", a / R));
  if (lambda / R > regime_ratio_limit) warnings.push_back(ratio_note("lambda/R", lambda / R));
  if (cfg.plate.substrate_thickness) {
    const double D = cfg.plate.coating_thickness() + *cfg.plate.substrate_thickness;
    if (D > 0.0 && a / D > regime_ratio_limit) warnings.push_back(ratio_note("a/D", a / D));
    if (D > 0.0 && lambda / D > regime_ratio_limit)
      warnings.push_back(ratio_note("lambda/D", lambda / D));
  }
  return warnings;
}

// ---------------------------------------------------------------------------
// JSON config
// ---------------------------------------------------------------------------

namespace detail {

using nlohmann::json;

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw MalformedInput(std::string("missing required field '") + key + "'");
  return j.at(key);
}

inline double require_number(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw MalformedInput(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

inline std::vector<Layer> parse_layers(const json& j) {
  const json& arr = require(j, "layers");
  if (!arr.is_array()) throw MalformedInput("'layers' must be an array");
  std::vector<Layer> out;
  out.reserve(arr.size());
  for (const auto& e : arr)
    out.push_back({require_number(e, "thickness_nm") * units::nm,
                   require_number(e, "density_kg_m3")});
  return out;
}

inline json layers_json(const std::vector<Layer>& layers) {
  json arr = json::array();
  for (const auto& l : layers)
    arr.push_back({{"thickness_nm", l.thickness / units::nm}, {"density_kg_m3", l.density}});
  return arr;
}

}  // namespace detail

/// Parses and validates an experiment config. Unknown keys (e.g. a
/// provenance note) are ignored.
inline ExperimentConfig parse_config(std::string_view text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedInput(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw MalformedInput("config root must be an object");

  ExperimentConfig cfg;
  if (root.contains("G_si")) {
    if (!root["G_si"].is_number()) throw MalformedInput("'G_si' must be a number");
    cfg.constants.G = root["G_si"].get<double>();
  }

  const json& sphere = detail::require(root, "sphere");
  cfg.sphere.radius = detail::require_number(sphere, "radius_nm") * units::nm;
  cfg.sphere.coating.layers = detail::parse_layers(sphere);
  cfg.sphere.coating.substrate_density = detail::require_number(sphere, "substrate_density_kg_m3");

  const json& plate = detail::require(root, "plate");
  cfg.plate.layers = detail::parse_layers(plate);
  cfg.plate.substrate_density = detail::require_number(plate, "substrate_density_kg_m3");
  const json& thick = detail::require(plate, "substrate_thickness_nm");
  if (thick.is_string() && thick.get<std::string>() == "semi_infinite") {
    cfg.plate.substrate_thickness = semi_infinite;
  } else if (thick.is_number()) {
    cfg.plate.substrate_thickness = thick.get<double>() * units::nm;
  } else {
    throw MalformedInput("'substrate_thickness_nm' must be a number or \"semi_infinite\"");
  }

  const json& sep = detail::require(root, "separation_nm");
  cfg.separation_min = detail::require_number(sep, "min") * units::nm;
  cfg.separation_max = detail::require_number(sep, "max") * units::nm;

  validate(cfg);
  return cfg;
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  using detail::json;
  json plate{{"layers", detail::layers_json(cfg.plate.layers)},
             {"substrate_density_kg_m3", cfg.plate.substrate_density}};
  if (cfg.plate.substrate_thickness)
    plate["substrate_thickness_nm"] = *cfg.plate.substrate_thickness / units::nm;
  else
    plate["substrate_thickness_nm"] = "semi_infinite";
  json root{{"G_si", cfg.constants.G},
            {"sphere",
             {{"radius_nm", cfg.sphere.radius / units::nm},
              {"layers", detail::layers_json(cfg.sphere.coating.layers)},
              {"substrate_density_kg_m3", cfg.sphere.coating.substrate_density}}},
            {"plate", plate},
            {"separation_nm",
             {{"min", cfg.separation_min / units::nm}, {"max", cfg.separation_max / units::nm}}}};
  return root.dump(2);
}

}  // namespace yukawa
