#pragma once

// Brute-force checks of the closed forms, at three levels of independence:
//   1. the analytic force of a point mass above a layered halfspace,
//   2. 1D adaptive quadrature over horizontal slices of the sphere, each
//      slice feeling the halfspace kernel of (1),
//   3. a 3D voxel sum of pair forces at toy scale, using nothing but the
//      point-pair Yukawa interaction.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <algorithm>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "core.hpp"
#include "planar.hpp"
#include "sphereplate.hpp"

namespace yukawa::oracle {

struct PointMass {
  double mass = 0.0;                      ///< kg
  std::array<double, 3> position{};       ///< m
};

/// Point-pair Yukawa potential energy, J:
///   V = -alpha G m1 m2 e^{-r/lambda} / r.
inline double pair_potential(const PointMass& m1, const PointMass& m2, const YukawaParams& p,
                             double G) {
  double r2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = m1.position[k] - m2.position[k];
    r2 += d * d;
  }
  if (!(r2 > 0.0)) throw DomainError("pair_potential: coincident points");
  const double r = std::sqrt(r2);
  return -p.alpha * G * (m1.mass * m2.mass) * attenuation(r / p.lambda) / r;
}

/// Magnitude of the Yukawa attraction (for alpha > 0) on a point mass m at
/// height z above a layered halfspace, N:
///   2 pi alpha G m lambda e^{-z/lambda} F(body, lambda).
/// A thin sheet of surface density sigma at distance h pulls with
/// 2 pi alpha G m sigma e^{-h/lambda}; integrating sheets over depth gives the
/// density factor.
inline double point_halfspace_force(double m, double z, const LayeredBody& body,
                                    const YukawaParams& p, double G) {
  if (!(z > 0.0)) throw DomainError("point_halfspace_force: z must be positive");
  return 2.0 * pi * p.alpha * G * m * p.lambda * attenuation(z / p.lambda) *
         plate_factor(body, p.lambda, PlateVariant::finite);
}

// ---------------------------------------------------------------------------
// Slice quadrature
// ---------------------------------------------------------------------------

struct QuadratureSpec {
  double rel_tol = 1e-10;
  std::uint64_t max_subdivisions = 4096;
};

struct Integral {
  double value = 0.0;
  double error = 0.0;
};

inline void validate(const QuadratureSpec& q) {
  if (!(q.rel_tol > 1e-14 && q.rel_tol <= 1e-2))
    throw DomainError("quadrature rel_tol must lie in (1e-14, 1e-2]");
  if (q.max_subdivisions < 64) throw DomainError("quadrature needs max_subdivisions >= 64");
}

/// Globally adaptive 15-point Gauss-Kronrod: the interval with the largest
/// embedded error estimate (|K15 - G7|) is bisected until the summed
/// estimate drops below rel_tol * |integral| or max_subdivisions intervals
/// exist.
inline Integral integrate(const std::function<double(double)>& f, double lo, double hi,
                          const QuadratureSpec& q) {
  validate(q);
  using rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  struct Piece {
    double lo, hi, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  // The rule is applied on [-1, 1] and rescaled here: the non-adaptive
  // error estimate of the library is not scaled by the interval width.
  auto eval = [&](double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    Piece p{a, b, 0.0, 0.0};
    double err = 0.0;
    p.value = half * rule::integrate([&](double x) { return f(mid + half * x); }, -1.0, 1.0, 0,
                                     0.0, &err);
    p.error = half * err;
    return p;
  };
  std::priority_queue<Piece> heap;
  heap.push(eval(lo, hi));
  double value = heap.top().value, error = heap.top().error;
  std::uint64_t pieces = 1;
  while (!(error <= q.rel_tol * std::abs(value))) {
    if (pieces >= q.max_subdivisions || !std::isfinite(value))
      throw ConvergenceFailure("quadrature error estimate " + std::to_string(error) +
                               " exceeds tolerance " +
                               std::to_string(q.rel_tol * std::abs(value)) + " after " +
                               std::to_string(pieces) + " subdivisions");
    const Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Piece left = eval(worst.lo, mid), right = eval(mid, worst.hi);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++pieces;
    if (pieces % 256 == 0) {  // refresh sums against drift
      value = error = 0.0;
      auto copy = heap;
      while (!copy.empty()) {
        value += copy.top().value;
        error += copy.top().error;
        copy.pop();
      }
    }
  }
  // Final sum in a fixed order so results do not depend on update history.
  std::vector<Piece> all;
  all.reserve(heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
  Integral out;
  for (const auto& p : all) {
    out.value += p.value;
    out.error += p.error;
  }
  return out;
}

/// A homogeneous sphere of the nested decomposition of a coated sphere:
/// radius, signed density and extra gap below it.
struct NestedSphere {
  double radius = 0.0;
  double density = 0.0;
  double offset = 0.0;
};

/// Coated sphere as a signed sum of homogeneous concentric spheres: the
/// outer density filling R, then each interface adding (rho_below -
/// rho_above) filling the radius below it.
inline std::vector<NestedSphere> nested_spheres(const SphereGeometry& sphere) {
  double top = 0.0;
  const auto steps = detail::interfaces(sphere.coating, top);
  std::vector<NestedSphere> out{{sphere.radius, top, 0.0}};
  for (const auto& s : steps) out.push_back({sphere.radius - s.depth, -s.jump, s.depth});
  return out;
}

/// Force on one homogeneous sphere whose lowest point sits a above the
/// plate: slices of area pi t (2R - t) at height a + t, each a sheet of
/// point masses in the halfspace kernel.
inline double homogeneous_slice_force(const NestedSphere& s, double a, const LayeredBody& plate,
                                      const YukawaParams& p, double G, const QuadratureSpec& q) {
  if (s.density == 0.0 || p.alpha == 0.0) return 0.0;
  const double R = s.radius;
  const double kernel_scale = point_halfspace_force(1.0, a, plate, {1.0, p.lambda}, G);
  if (kernel_scale == 0.0) return 0.0;
  // Kernel relative to its value at height a keeps the integrand O(R^2).
  auto slice = [&](double t) {
    const double area = pi * t * (2.0 * R - t);
    return area * point_halfspace_force(1.0, a + t, plate, {1.0, p.lambda}, G) / kernel_scale;
  };
  const Integral I = integrate(slice, 0.0, 2.0 * R, q);
  return -p.alpha * s.density * kernel_scale * I.value;
}

/// Sphere-plate force from slice quadrature over the nested homogeneous
/// spheres, N (signed, negative = attraction).
inline double slice_force(const ExperimentConfig& cfg, const YukawaParams& p, double a,
                          const QuadratureSpec& q = {}) {
  yukawa::detail::require_separation(a);
  double total = 0.0;
  for (const auto& s : nested_spheres(cfg.sphere))
    total += homogeneous_slice_force(s, a + s.offset, cfg.plate, p, cfg.constants.G, q);
  return total;
}

// ---------------------------------------------------------------------------
// Voxel sum
// ---------------------------------------------------------------------------

struct VoxelOptions {
  int grid_n = 64;                 ///< sphere voxels per axis (multiple of 4)
  /// Sub-samples per sphere diameter used to fill voxels. Held fixed across
  /// grid levels so the Richardson pair sees the same sphere volume.
  int occupancy_resolution = 512;
  double lateral_efolds = 20.0;    ///< plate radius in units of (lambda + R)
  double depth_efolds = 20.0;      ///< plate depth below the coating in units of lambda
  double evaluation_budget = 2e9;  ///< kernel evaluations allowed per grid
};

struct VoxelResult {
  double force = 0.0;             ///< midpoint sum at grid_n, N
  double force_coarse = 0.0;      ///< midpoint sum at grid_n / 2, N
  double richardson_error = 0.0;  ///< |F_n - F_{n/2}| / 3
  double extrapolated = 0.0;      ///< F_n + (F_n - F_{n/2}) / 3
  std::uint64_t sphere_voxels = 0;
  std::uint64_t plate_voxels = 0;
  int workers = 1;

  [[nodiscard]] double relative_error() const {
    return force == 0.0 ? 0.0 : richardson_error / std::abs(force);
  }
};

inline constexpr double voxel_max_radius = 2e-6;
inline constexpr int voxel_max_grid = 256;

namespace detail {

inline double density_at_depth(const LayeredBody& body, double depth) {
  double top = 0.0;
  for (const auto& l : body.layers) {
    top += l.thickness;
    if (depth < top) return l.density;
  }
  return body.substrate_density;
}

struct GridSum {
  double force = 0.0;
  std::uint64_t sphere_voxels = 0;
  std::uint64_t plate_voxels = 0;
};

/// Midpoint sum of z pair forces on a cubic lattice of spacing h = 2R/n.
/// Sphere and plate voxel centres share the lattice, so the vertical gap of
/// any pair is a + m h and its lateral offset squared is h^2 (i^2 + j^2).
/// The plate window is a disc of the given radius centred under each sphere
/// column; it differs from one fixed disc only by terms below
/// e^{-(L - R)/lambda}.
inline GridSum voxel_sum(const ExperimentConfig& cfg, const YukawaParams& p, double a, int n,
                         const VoxelOptions& opt) {
  const double R = cfg.sphere.radius;
  const double lambda = p.lambda;
  const double h = 2.0 * R / n;
  const double h3 = h * h * h;

  // Sphere: mass per horizontal slab of voxels.
  std::vector<double> slab_mass(static_cast<std::size_t>(n), 0.0);
  GridSum out;
  const int s = std::max(1, opt.occupancy_resolution / n);
  const double sub_volume = h3 / (static_cast<double>(s) * s * s);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double mass = 0.0;
        for (int u = 0; u < s; ++u) {
          const double x = (i + (u + 0.5) / s) * h - R;
          for (int v = 0; v < s; ++v) {
            const double y = (j + (v + 0.5) / s) * h - R;
            for (int w = 0; w < s; ++w) {
              const double z = (k + (w + 0.5) / s) * h - R;
              const double r = std::sqrt(x * x + y * y + z * z);
              if (r < R) mass += density_at_depth(cfg.sphere.coating, R - r) * sub_volume;
            }
          }
        }
        if (mass > 0.0) {
          slab_mass[static_cast<std::size_t>(k)] += mass;
          ++out.sphere_voxels;
        }
      }
    }
  }

  // Plate: depth profile and lateral multiplicities of i^2 + j^2.
  double depth = cfg.plate.coating_thickness() + opt.depth_efolds * lambda;
  if (cfg.plate.substrate_thickness)
    depth = std::min(depth, cfg.plate.coating_thickness() + *cfg.plate.substrate_thickness);
  const int nd = std::max(1, static_cast<int>(std::ceil(depth / h)));
  std::vector<double> plate_density(static_cast<std::size_t>(nd));
  for (int j = 0; j < nd; ++j)
    plate_density[static_cast<std::size_t>(j)] = density_at_depth(cfg.plate, (j + 0.5) * h);

  const double L = opt.lateral_efolds * (lambda + R);
  const auto nl = static_cast<std::int64_t>(std::floor(L / h));
  const std::int64_t qmax = nl * nl;
  std::vector<std::uint32_t> mult(static_cast<std::size_t>(qmax + 1), 0);
  for (std::int64_t i = -nl; i <= nl; ++i)
    for (std::int64_t j = -nl; j <= nl; ++j) {
      const std::int64_t q = i * i + j * j;
      if (q <= qmax) ++mult[static_cast<std::size_t>(q)];
    }
  std::vector<std::int64_t> qs;
  std::uint64_t columns = 0;
  for (std::int64_t q = 0; q <= qmax; ++q)
    if (mult[static_cast<std::size_t>(q)] != 0) {
      qs.push_back(q);
      columns += mult[static_cast<std::size_t>(q)];
    }
  out.plate_voxels = columns * static_cast<std::uint64_t>(nd);

  const int mmax = n + nd;  // gap index m = k + j + 1 runs over [1, n + nd - 1]
  const double evaluations = static_cast<double>(qs.size()) * mmax;
  if (evaluations > opt.evaluation_budget)
    throw ResourceLimit("voxel sum needs " + std::to_string(evaluations) +
                        " kernel evaluations, budget is " +
                        std::to_string(opt.evaluation_budget));

  // column_sum[m]: sum over one plate layer of the z pull per unit mass pair
  // at vertical gap a + m h.
  std::vector<double> column_sum(static_cast<std::size_t>(mmax), 0.0);
  for (int m = 1; m < mmax; ++m) {
    const double vz = a + m * h;
    double acc = 0.0;
    for (const auto q : qs) {
      const double r = std::sqrt(vz * vz + h * h * static_cast<double>(q));
      const double e = attenuation(r / lambda);
      if (e == 0.0) break;  // r grows with q
      acc += mult[static_cast<std::size_t>(q)] * e * (1.0 / r + 1.0 / lambda) * vz / (r * r);
    }
    column_sum[static_cast<std::size_t>(m)] = acc;
  }

  double force = 0.0;
  for (int k = 0; k < n; ++k) {
    const double mk = slab_mass[static_cast<std::size_t>(k)];
    if (mk == 0.0) continue;
    double field = 0.0;
    for (int j = 0; j < nd; ++j)
      field += plate_density[static_cast<std::size_t>(j)] * column_sum[static_cast<std::size_t>(k + j + 1)];
    force += mk * field;
  }
  out.force = -p.alpha * cfg.constants.G * h3 * force;
  return out;
}

}  // namespace detail

/// 3D midpoint-rule sum of pair forces between sphere voxels and plate
/// voxels at toy scale, with a Richardson error estimate from the grid_n / 2
/// lattice. Single-threaded; summation order is fixed.
inline VoxelResult voxel_force(const ExperimentConfig& toy, const YukawaParams& p, double a,
                               const VoxelOptions& opt = {}) {
  yukawa::detail::require_separation(a);
  if (!(p.lambda > 0.0)) throw DomainError("lambda must be positive");
  if (toy.sphere.radius > voxel_max_radius)
    throw DomainError("voxel_force is limited to spheres of radius <= 2 um");
  if (opt.grid_n < 8 || opt.grid_n > voxel_max_grid || opt.grid_n % 4 != 0)
    throw DomainError("voxel grid_n must be a multiple of 4 in [8, 256]");
  if (opt.occupancy_resolution < 1) throw DomainError("occupancy_resolution must be >= 1");
  if (opt.lateral_efolds < 20.0 || opt.depth_efolds < 20.0)
    throw DomainError("voxel plate truncation must be at least 20 e-folds");

  VoxelResult res;
  if (p.alpha == 0.0) return res;
  const auto fine = detail::voxel_sum(toy, p, a, opt.grid_n, opt);
  const auto coarse = detail::voxel_sum(toy, p, a, opt.grid_n / 2, opt);
  res.force = fine.force;
  res.force_coarse = coarse.force;
  res.richardson_error = std::abs(fine.force - coarse.force) / 3.0;
  res.extrapolated = fine.force + (fine.force - coarse.force) / 3.0;
  res.sphere_voxels = fine.sphere_voxels;
  res.plate_voxels = fine.plate_voxels;
  return res;
}

/// Homogeneous toy geometry for the voxel check: sphere of radius R and
/// density rho_sphere above a semi-infinite plate of density rho_plate.
inline ExperimentConfig toy_config(double G, double R, double rho_sphere, double rho_plate) {
  ExperimentConfig cfg;
  cfg.constants.G = G;
  cfg.sphere.radius = R;
  cfg.sphere.coating.substrate_density = rho_sphere;
  cfg.plate.substrate_density = rho_plate;
  cfg.plate.substrate_thickness = semi_infinite;
  cfg.separation_min = 1e-9;
  cfg.separation_max = R;
  return cfg;
}

}  // namespace yukawa::oracle
