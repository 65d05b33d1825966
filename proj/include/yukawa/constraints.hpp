#pragma once

// Inversion of the experimental confidence band into upper bounds on the
// Yukawa strength |alpha| and comparison of the exact and PFA exclusion
// curves.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "core.hpp"
#include "planar.hpp"
#include "sphereplate.hpp"

namespace yukawa {

struct BandSample {
  double a = 0.0;   ///< separation, m
  double xi = 0.0;  ///< confidence half-width, Pa
};

/// Half-widths of the theory-experiment confidence interval, sorted by
/// separation.
struct ConfidenceBand {
  std::vector<BandSample> samples;
  double confidence_level = 0.95;
};

struct ExclusionPoint {
  double lambda = 0.0;
  double alpha_max = 0.0;
  double a_star = 0.0;
  PhiMode mode = PhiMode::exact;
};

/// One lambda of an exclusion curve. Missing modes and degenerate rows carry
/// NaN bounds.
struct ComparisonRow {
  double lambda = 0.0;
  double alpha_exact = std::numeric_limits<double>::quiet_NaN();
  double alpha_pfa = std::numeric_limits<double>::quiet_NaN();
  double relative_deviation = std::numeric_limits<double>::quiet_NaN();
  double a_star = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;
};

// ---------------------------------------------------------------------------
// Formatting helpers (locale independent)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string to_chars_string(double v, std::chars_format fmt, int precision) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, fmt, precision);
  return std::string(buf.data(), res.ptr);
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(std::string_view field, std::size_t line) {
  const std::string t = trim(field);
  double v = 0.0;
  const char* first = t.data();
  if (!t.empty() && t.front() == '+') ++first;
  auto res = std::from_chars(first, t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw MalformedInput("band line " + std::to_string(line) + ": not a number: '" + t + "'");
  return v;
}

}  // namespace detail

/// Full-precision scientific notation used in CSV and stdout.
inline std::string format_full(double v) {
  if (std::isnan(v)) return "nan";
  return detail::to_chars_string(v, std::chars_format::scientific, 16);
}

/// Three significant figures for human-readable reports: 2.88167e13 ->
/// "2.88e13".
inline std::string report_rounding(double alpha) {
  std::string s = detail::to_chars_string(alpha, std::chars_format::scientific, 2);
  const auto e = s.find('e');
  if (e == std::string::npos) return s;
  std::string mantissa = s.substr(0, e);
  std::string exponent = s.substr(e + 1);
  bool negative = false;
  if (!exponent.empty() && (exponent.front() == '+' || exponent.front() == '-')) {
    negative = exponent.front() == '-';
    exponent.erase(0, 1);
  }
  exponent.erase(0, std::min(exponent.find_first_not_of('0'), exponent.size() - 1));
  return mantissa + "e" + (negative ? "-" : "") + exponent;
}

// ---------------------------------------------------------------------------
// Band ingestion
// ---------------------------------------------------------------------------

/// Parses a band CSV with header `a_nm,xi_mPa`. Rows are sorted by
/// separation; every sample must lie inside the config's separation range.
inline ConfidenceBand load_band(std::string_view text, const ExperimentConfig& cfg) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  ConfidenceBand band;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (!have_header) {
      std::string h;
      std::remove_copy_if(t.begin(), t.end(), std::back_inserter(h),
                          [](char c) { return c == ' ' || c == '\t'; });
      if (h.rfind("\xEF\xBB\xBF", 0) == 0) h.erase(0, 3);
      if (h != "a_nm,xi_mPa") throw MalformedInput("band header must be 'a_nm,xi_mPa'");
      have_header = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos)
      throw MalformedInput("band line " + std::to_string(lineno) + ": expected two columns");
    const double a = detail::parse_double(std::string_view(t).substr(0, comma), lineno) * units::nm;
    const double xi =
        detail::parse_double(std::string_view(t).substr(comma + 1), lineno) * units::mPa;
    if (!std::isfinite(a) || !std::isfinite(xi))
      throw DomainError("band line " + std::to_string(lineno) + ": non-finite value");
    if (!(xi > 0.0))
      throw DomainError("band line " + std::to_string(lineno) + ": xi must be positive");
    if (a < cfg.separation_min || a > cfg.separation_max)
      throw DomainError("band line " + std::to_string(lineno) +
                        ": separation outside the configured range");
    band.samples.push_back({a, xi});
  }
  if (!have_header) throw MalformedInput("band is empty");
  if (band.samples.empty()) throw MalformedInput("band has no samples");
  std::sort(band.samples.begin(), band.samples.end(),
            [](const BandSample& l, const BandSample& r) { return l.a < r.a; });
  for (std::size_t i = 1; i < band.samples.size(); ++i)
    if (band.samples[i].a == band.samples[i - 1].a)
      throw DomainError("band has duplicate separations");
  return band;
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

/// Largest |alpha| compatible with an effective pressure bounded by xi at
/// separation a. The signal is linear in alpha, so the bound is xi divided
/// by the unit-strength signal.
inline double alpha_max_at(const ExperimentConfig& cfg, double lambda, double a, double xi,
                           PhiMode mode) {
  if (!(xi > 0.0)) throw DomainError("xi must be positive");
  const double unit = effective_pressure(cfg, {1.0, lambda}, a, mode);
  const double bound = xi / unit;
  if (!(unit > 0.0) || !std::isfinite(bound))
    throw DegenerateConstraint("no constraint obtainable at lambda = " +
                               format_full(lambda) + " m, a = " + format_full(a) + " m");
  return bound;
}

enum class BandSampling {
  samples_only,          ///< evaluate at the tabulated separations only
  linear_interpolation,  ///< also between samples, with xi interpolated linearly
};

namespace detail {

inline std::vector<BandSample> evaluation_points(const ConfidenceBand& band,
                                                 BandSampling sampling) {
  if (sampling == BandSampling::samples_only || band.samples.size() < 2) return band.samples;
  constexpr int subdivisions = 16;
  std::vector<BandSample> pts;
  for (std::size_t i = 0; i + 1 < band.samples.size(); ++i) {
    const auto& lo = band.samples[i];
    const auto& hi = band.samples[i + 1];
    for (int k = 0; k < subdivisions; ++k) {
      const double t = static_cast<double>(k) / subdivisions;
      pts.push_back({lo.a + t * (hi.a - lo.a), lo.xi + t * (hi.xi - lo.xi)});
    }
  }
  pts.push_back(band.samples.back());
  return pts;
}

}  // namespace detail

/// Strongest (smallest) bound over the band; ties go to the smaller
/// separation.
inline ExclusionPoint strongest_alpha(const ExperimentConfig& cfg, const ConfidenceBand& band,
                                      double lambda, PhiMode mode,
                                      BandSampling sampling = BandSampling::samples_only) {
  if (band.samples.empty()) throw DomainError("band is empty");
  std::vector<BandSample> pts = detail::evaluation_points(band, sampling);
  std::sort(pts.begin(), pts.end(),
            [](const BandSample& l, const BandSample& r) { return l.a < r.a; });
  std::optional<ExclusionPoint> best;
  for (const auto& s : pts) {
    double alpha = 0.0;
    try {
      alpha = alpha_max_at(cfg, lambda, s.a, s.xi, mode);
    } catch (const DegenerateConstraint&) {
      continue;
    }
    if (!best || alpha < best->alpha_max) best = ExclusionPoint{lambda, alpha, s.a, mode};
  }
  if (!best)
    throw DegenerateConstraint("every band sample is degenerate at lambda = " +
                               format_full(lambda) + " m");
  return *best;
}

struct ModeSet {
  bool exact = true;
  bool pfa = true;
};

/// Log-spaced grid with exact end points; a single point yields {lo}.
inline std::vector<double> log_grid(double lo, double hi, int points) {
  if (points < 1) throw DomainError("grid needs at least one point");
  if (!(lo > 0.0) || (points > 1 && !(lo < hi))) throw DomainError("grid needs 0 < lo < hi");
  std::vector<double> grid(static_cast<std::size_t>(points));
  grid.front() = lo;
  if (points == 1) return grid;
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 1; i + 1 < points; ++i) grid[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  grid.back() = hi;
  return grid;
}

/// One comparison row per grid lambda, in grid order.
inline std::vector<ComparisonRow> exclusion_curve(const ExperimentConfig& cfg,
                                                  const ConfidenceBand& band,
                                                  const std::vector<double>& lambda_grid,
                                                  ModeSet modes = {},
                                                  BandSampling sampling = BandSampling::samples_only) {
  if (lambda_grid.empty()) throw DomainError("lambda grid is empty");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > 0.0)) throw DomainError("lambda grid must be positive");
    if (i > 0 && lambda_grid[i] < lambda_grid[i - 1])
      throw DomainError("lambda grid must be sorted");
  }
  std::vector<ComparisonRow> rows;
  rows.reserve(lambda_grid.size());
  for (const double lambda : lambda_grid) {
    ComparisonRow row;
    row.lambda = lambda;
    try {
      if (modes.exact) {
        const auto e = strongest_alpha(cfg, band, lambda, PhiMode::exact, sampling);
        row.alpha_exact = e.alpha_max;
        row.a_star = e.a_star;
      }
      if (modes.pfa) {
        const auto p = strongest_alpha(cfg, band, lambda, PhiMode::pfa, sampling);
        row.alpha_pfa = p.alpha_max;
        if (!modes.exact) row.a_star = p.a_star;
      }
    } catch (const DegenerateConstraint&) {
      row = ComparisonRow{};
      row.lambda = lambda;
      row.degenerate = true;
    }
    if (modes.exact && modes.pfa && !row.degenerate)
      row.relative_deviation = row.alpha_exact / row.alpha_pfa - 1.0;
    rows.push_back(row);
  }
  return rows;
}

inline constexpr std::string_view curve_csv_header =
    "lambda_nm,alpha_exact,alpha_pfa,rel_dev,a_star_nm,flag";

namespace detail {

/// Lengths go back to nm with 15 significant digits, which hides the last-ulp
/// noise of the nm -> m -> nm round trip (250 nm would otherwise print as
/// 2.5000000000000003e+02).
inline std::string format_nm(double metres) {
  if (std::isnan(metres)) return "nan";
  return to_chars_string(metres / units::nm, std::chars_format::scientific, 14);
}

}  // namespace detail

inline std::string curve_to_csv(const std::vector<ComparisonRow>& rows) {
  std::string out(curve_csv_header);
  out += '\n';
  for (const auto& r : rows) {
    out += detail::format_nm(r.lambda) + ',' + format_full(r.alpha_exact) + ',' +
           format_full(r.alpha_pfa) + ',' + format_full(r.relative_deviation) + ',' +
           detail::format_nm(r.a_star) + ',' + (r.degenerate ? "degenerate" : "ok") + '\n';
  }
  return out;
}

}  // namespace yukawa
