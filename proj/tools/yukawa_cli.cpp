// yukawa: command-line front end for the Yukawa sphere-plate constraint
// library. Exit codes: 0 success, 1 internal or validation failure, 2 input
// error.

#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <yukawa/yukawa.hpp>

#ifndef YUKAWA_VERSION
#define YUKAWA_VERSION "dev"
#endif

namespace {

using namespace yukawa;

constexpr int exit_ok = 0;
constexpr int exit_internal = 1;
constexpr int exit_input = 2;

/// Raised for unreadable or unwritable files; maps to exit 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << body;
  if (!out.flush()) throw InputError("write failed for '" + path + "'");
}

/// 15 significant digits, scientific, locale independent. Zero prints as 0.
std::string fmt(double v) {
  if (v == 0.0) return "0";
  if (std::isnan(v)) return "nan";
  std::array<char, 64> buf{};
  auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::scientific, 14);
  return std::string(buf.data(), r.ptr);
}

std::string fmt_short(double v) {
  std::array<char, 32> buf{};
  auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::scientific, 2);
  return std::string(buf.data(), r.ptr);
}

std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

PhiMode parse_mode(const std::string& m) { return m == "pfa" ? PhiMode::pfa : PhiMode::exact; }

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be positive");
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw DomainError(std::string(name) + " must be finite");
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct Check {
  std::string name;
  double deviation;
  double tolerance;
  bool ok() const { return std::isfinite(deviation) && deviation <= tolerance; }
};

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

std::vector<Check> quick_checks(const ExperimentConfig& cfg) {
  std::vector<Check> checks;
  const auto seps = linspace(cfg.separation_min, cfg.separation_max, 10);
  const auto lambdas = log_grid(20 * units::nm, 400 * units::nm, 10);

  for (const double a : seps)
    for (const double l : lambdas) {
      const YukawaParams p{1.0, l};
      const double exact = sphere_plate_force(cfg, p, a, PhiMode::exact);
      const double slice = oracle::slice_force(cfg, p, a);
      checks.push_back({"slice vs exact a_nm=" + fmt_short(a / units::nm) +
                            " lambda_nm=" + fmt_short(l / units::nm),
                        rel(slice, exact), 1e-8});
    }

  double pfa_identity = 0.0, gradient = 0.0;
  for (const double a : seps)
    for (const double l : lambdas) {
      const YukawaParams p{1.0, l};
      const double f = sphere_plate_force(cfg, p, a, PhiMode::pfa);
      const double e = yukawa_energy_per_area(cfg, p, a, PlateVariant::finite);
      pfa_identity = std::max(pfa_identity, rel(f, 2 * pi * cfg.sphere.radius * e));
      const double h = a / 1000;
      auto F = [&](double x) { return sphere_plate_force(cfg, p, x, PhiMode::exact); };
      const double fd = (-F(a + 2 * h) + 8 * F(a + h) - 8 * F(a - h) + F(a - 2 * h)) / (12 * h);
      gradient = std::max(gradient, rel(force_gradient(cfg, p, a, PhiMode::exact), fd));
    }
  checks.push_back({"pfa force equals 2 pi R energy per area (grid max)", pfa_identity, 1e-12});
  checks.push_back({"gradient vs central difference (grid max)", gradient, 1e-6});

  double series = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = 0.005 + 0.015 * i / 999.0;
    series = std::max(series, rel(detail::phi_series(x, 1.0), detail::phi_closed(x, 1.0)));
  }
  checks.push_back({"phi series vs closed form near switch", series, 1e-10});
  return checks;
}

Check voxel_check() {
  const auto toy = oracle::toy_config(G_codata2006, 1 * units::um, 2200.0, 2330.0);
  const YukawaParams p{1.0, 500 * units::nm};
  const double a = 200 * units::nm;
  const auto r = oracle::voxel_force(toy, p, a);
  const double exact = sphere_plate_force(toy, p, a, PhiMode::exact);
  return {"voxel vs exact R_um=1 a_nm=200 lambda_nm=500 richardson=" +
              fmt_short(r.relative_error()),
          rel(r.force, exact), std::max(1e-3, r.relative_error())};
}

int run_validate(const ExperimentConfig& cfg, const std::string& level) {
  auto checks = quick_checks(cfg);
  if (level == "full") checks.push_back(voxel_check());
  std::cout << "TAP version 13\n1.." << checks.size() << '\n';
  bool all = true;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto& c = checks[i];
    all = all && c.ok();
    std::cout << (c.ok() ? "ok " : "not ok ") << i + 1 << " - " << c.name
              << " # deviation=" << fmt_short(c.deviation) << " tolerance=" << fmt_short(c.tolerance)
              << '\n';
  }
  return all ? exit_ok : exit_internal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Yukawa sphere-plate forces and constraints from Casimir experiments"};
  app.set_version_flag("--version", std::string(YUKAWA_VERSION));
  app.require_subcommand(1);

  std::string config_path, band_path, out_path, mode = "exact", level = "quick",
                                              plate = "semi_infinite";
  double lambda_nm = 0, alpha = 0, sep_nm = 0, xi_mpa = 0, lambda_min = 0, lambda_max = 0;
  int points = 0;

  auto add_config = [&](CLI::App* c) {
    c->add_option("--config", config_path, "experiment config (JSON)")->required();
  };
  auto add_point = [&](CLI::App* c) {
    c->add_option("--lambda", lambda_nm, "interaction range, nm")->required();
    c->add_option("--alpha", alpha, "Yukawa strength")->required();
    c->add_option("--sep", sep_nm, "separation, nm")->required();
  };

  auto* pressure = app.add_subcommand("pressure", "plate-plate Yukawa pressure, Pa");
  add_config(pressure);
  add_point(pressure);
  pressure->add_option("--plate", plate, "plate substrate treatment")
      ->check(CLI::IsMember({"semi_infinite", "finite"}));

  auto* force = app.add_subcommand("force", "sphere-plate Yukawa force, N");
  add_config(force);
  add_point(force);
  force->add_option("--mode", mode, "geometry function")->check(CLI::IsMember({"exact", "pfa"}));

  auto* amax = app.add_subcommand("alpha-max", "upper bound on |alpha| at one lambda");
  add_config(amax);
  amax->add_option("--lambda", lambda_nm, "interaction range, nm")->required();
  auto* band_opt = amax->add_option("--band", band_path, "confidence band CSV (a_nm,xi_mPa)");
  auto* sep_opt = amax->add_option("--sep", sep_nm, "separation, nm");
  auto* xi_opt = amax->add_option("--xi", xi_mpa, "confidence half-width, mPa");
  sep_opt->needs(xi_opt)->excludes(band_opt);
  xi_opt->needs(sep_opt)->excludes(band_opt);
  amax->add_option("--mode", mode, "geometry function")
      ->check(CLI::IsMember({"exact", "pfa", "both"}));

  auto* excl = app.add_subcommand("exclusion", "exact and PFA exclusion curves as CSV");
  add_config(excl);
  excl->add_option("--band", band_path, "confidence band CSV (a_nm,xi_mPa)")->required();
  excl->add_option("--lambda-min", lambda_min, "smallest lambda, nm")->required();
  excl->add_option("--lambda-max", lambda_max, "largest lambda, nm");
  excl->add_option("--points", points, "log-spaced grid points")->required();
  excl->add_option("--mode", mode, "modes to evaluate")
      ->check(CLI::IsMember({"exact", "pfa", "both"}));
  excl->add_option("--out", out_path, "CSV output path")->required();

  auto* val = app.add_subcommand("validate", "oracle and identity checks (TAP output)");
  add_config(val);
  val->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));

  // "both" is the natural default for the multi-mode commands.
  amax->preparse_callback([&](std::size_t) { mode = "both"; });
  excl->preparse_callback([&](std::size_t) { mode = "both"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_input;
  }

  try {
    // Input stage: everything that can be blamed on the user.
    ExperimentConfig cfg;
    std::string config_text;
    try {
      config_text = read_file(config_path);
      cfg = parse_config(config_text);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return exit_input;
    }

    if (*pressure || *force) {
      try {
        require_positive(lambda_nm, "--lambda");
        require_positive(sep_nm, "--sep");
        require_finite(alpha, "--alpha");
      } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
      }
      const YukawaParams p{alpha, lambda_nm * units::nm};
      const double a = sep_nm * units::nm;
      for (const auto& w : validate_regime(cfg, a, p.lambda)) std::cerr << "warning: " << w << '\n';
      const double v =
          *pressure ? yukawa_pressure(cfg, p, a,
                                      plate == "finite" ? PlateVariant::finite
                                                        : PlateVariant::semi_infinite)
                    : sphere_plate_force(cfg, p, a, parse_mode(mode));
      std::cout << fmt(v) << '\n';
      return exit_ok;
    }

    if (*amax) {
      ConfidenceBand band;
      try {
        require_positive(lambda_nm, "--lambda");
        if (!band_path.empty()) {
          band = load_band(read_file(band_path), cfg);
        } else if (*sep_opt) {
          require_positive(sep_nm, "--sep");
          require_positive(xi_mpa, "--xi");
          band.samples.push_back({sep_nm * units::nm, xi_mpa * units::mPa});
        } else {
          throw InputError("alpha-max needs --band or --sep with --xi");
        }
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
      }
      const double lambda = lambda_nm * units::nm;
      std::vector<PhiMode> modes;
      if (mode != "pfa") modes.push_back(PhiMode::exact);
      if (mode != "exact") modes.push_back(PhiMode::pfa);
      for (const PhiMode m : modes) {
        const auto pt = strongest_alpha(cfg, band, lambda, m);
        std::cout << to_string(m) << " alpha_max=" << fmt(pt.alpha_max)
                  << " a_star_nm=" << fmt(pt.a_star / units::nm)
                  << " report=" << report_rounding(pt.alpha_max) << '\n';
      }
      return exit_ok;
    }

    if (*excl) {
      ConfidenceBand band;
      std::string band_text;
      std::vector<double> grid;
      try {
        band_text = read_file(band_path);
        band = load_band(band_text, cfg);
        if (points < 1) throw DomainError("--points must be >= 1");
        require_positive(lambda_min, "--lambda-min");
        if (points > 1) {
          require_positive(lambda_max, "--lambda-max");
          if (!(lambda_min < lambda_max)) throw DomainError("--lambda-min must be < --lambda-max");
        }
        grid = log_grid(lambda_min * units::nm, lambda_max * units::nm, points);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
      }
      const ModeSet modes{mode != "pfa", mode != "exact"};
      const auto rows = exclusion_curve(cfg, band, grid, modes);

      std::string cmdline;
      for (int i = 0; i < argc; ++i) cmdline += (i ? " " : "") + std::string(argv[i]);
      const nlohmann::ordered_json manifest{
          {"tool_version", YUKAWA_VERSION},
          {"config_sha256", sha256_hex(config_text)},
          {"band_sha256", sha256_hex(band_text)},
          {"command_line", cmdline},
          {"timestamp_utc", utc_timestamp()},
      };
      try {
        write_file(out_path, curve_to_csv(rows));
        write_file(out_path + ".manifest.json", manifest.dump(2) + "\n");
      } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
      }
      std::size_t degenerate = 0;
      for (const auto& r : rows) degenerate += r.degenerate;
      std::cerr << rows.size() << " rows written to " << out_path;
      if (degenerate) std::cerr << " (" << degenerate << " degenerate)";
      std::cerr << '\n';
      return exit_ok;
    }

    if (*val) return run_validate(cfg, level);
  } catch (const DegenerateConstraint& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_internal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return exit_internal;
  }
  return exit_internal;
}
