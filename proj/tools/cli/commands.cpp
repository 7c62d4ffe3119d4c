#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>

#include "config.hpp"
#include "report.hpp"

#ifndef MOBIUS_MONO_VERSION
#define MOBIUS_MONO_VERSION "0.0.0"
#endif

namespace mobius_mono::cli {

namespace {

namespace fs = std::filesystem;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << content;
}

Config load_with_overrides(const CommandOptions& options) {
  if (options.config.empty()) throw ConfigError("--config PATH is required");
  Config cfg = load_config(options.config);
  if (options.tol) {
    if (!(*options.tol > 0.0)) throw ConfigError("--tol must be positive");
    cfg.quadrature.tol = *options.tol;
  }
  if (options.max_depth) {
    if (*options.max_depth < 1 || *options.max_depth > 30) throw ConfigError("--max-depth must be in 1..30");
    cfg.quadrature.max_depth = *options.max_depth;
  }
  return cfg;
}

Json header(const std::string& command, const Config& cfg) {
  Json doc;
  doc["tool"] = {{"name", "mobius-mono"}, {"version", MOBIUS_MONO_VERSION}};
  doc["command"] = command;
  doc["config_path"] = cfg.source;
  doc["config"] = yaml_to_json(cfg.document);
  doc["quadrature"] = {{"tol", cfg.quadrature.tol}, {"max_depth", cfg.quadrature.max_depth}};
  return doc;
}

Decomposition decomposition_of(const Scenario& scn) { return scn.decomposition(); }

std::string bracket(double lo, double hi) { return "[" + format_double(lo) + ", " + format_double(hi) + "]"; }

// Appends the per-radius and per-pair records of a sweep.
void sweep_records(const Scenario& scn, const MonotonicityReport& rep, const Checks& checks,
                   std::vector<CheckRecord>& records) {
  const double Rk = std::pow(scn.R(), scn.k());
  for (const RadiusRow& row : rep.rows) {
    CheckRecord c = from_residual(
        "scaling J = R^k Q_A at r = " + format_double(row.r),
        make_residual(row.J.value, Rk * row.QA.value, row.J.error_estimate + Rk * row.QA.error_estimate,
                      row.J.tol_met && row.QA.tol_met));
    records.push_back(c);
  }
  for (const PairRow& p : rep.pairs) {
    const std::string span = bracket(p.r_lo, p.r_hi);
    if (checks.volume_identity) records.push_back(from_residual("volume_identity " + span, p.volume));
    if (checks.weighted_identity) records.push_back(from_residual("weighted_identity " + span, p.weighted));
    const auto monotone = [&](const char* what, const IdentityResidual& id, double err_sum) {
      CheckRecord c;
      c.name = std::string("monotone ") + what + " " + span;
      c.rule = PassRule::AtLeast;
      c.lhs = id.lhs;
      c.rhs = 0.0;
      c.residual = id.lhs;
      c.budget = 3.0 * err_sum;
      c.pass = evaluate(c.rule, c.residual, c.budget);
      return c;
    };
    const auto row_of = [&](double r) -> const RadiusRow& {
      for (const auto& row : rep.rows) {
        if (row.r == r) return row;
      }
      return rep.rows.front();
    };
    const RadiusRow& lo = row_of(p.r_lo);
    const RadiusRow& hi = row_of(p.r_hi);
    records.push_back(monotone("J", p.volume, lo.J.error_estimate + hi.J.error_estimate));
    records.push_back(monotone("I", p.weighted, lo.I.error_estimate + hi.I.error_estimate));
  }
}

Json sweep_json(const MonotonicityReport& rep, const std::vector<bool>& row_pass) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const RadiusRow& r = rep.rows[i];
    rows.push_back({{"r", r.r},
                    {"s", r.s},
                    {"J", to_json(r.J)},
                    {"I", to_json(r.I)},
                    {"QA", to_json(r.QA)},
                    {"QI", to_json(r.QI)},
                    {"tol_met", r.J.tol_met && r.I.tol_met && r.QA.tol_met && r.QI.tol_met},
                    {"pass", static_cast<bool>(row_pass[i])}});
  }
  Json eq = {{"normal_sup", rep.equality.normal_sup},
             {"direction_sup", rep.equality.direction_sup},
             {"constant", rep.equality.constant}};
  return Json{{"csv", "sweep.csv"}, {"rows", rows}, {"equality_diagnostics", eq}};
}

bool all_pass(const std::vector<CheckRecord>& records) {
  for (const auto& c : records) {
    if (!to_json(c)["pass"].get<bool>()) return false;
  }
  return true;
}

Json records_json(const std::vector<CheckRecord>& records) {
  Json a = Json::array();
  for (const auto& c : records) a.push_back(to_json(c));
  return a;
}

void print_records(const std::vector<CheckRecord>& records, std::ostream& out) {
  for (const auto& c : records) {
    const bool pass = to_json(c)["pass"].get<bool>();
    out << (pass ? "PASS " : "FAIL ") << c.name;
    if (!c.error.empty()) {
      out << "  error: " << c.error;
    } else {
      out << "  residual=" << format_double(c.residual) << " budget=" << format_double(c.budget);
    }
    out << '\n';
  }
}

int cmd_decompose(const CommandOptions& options, std::ostream& out) {
  const Config cfg = load_with_overrides(options);
  const MobiusMap map = build_map(cfg);
  const Decomposition dec = map.decomposition() ? *map.decomposition() : isometric_decomposition(map);
  const Json j = to_json(dec);
  out << j.dump(2) << '\n';
  if (options.out_dir) {
    Json doc = header("decompose", cfg);
    doc["decomposition"] = j;
    write_file(fs::path(*options.out_dir) / "report.json", doc.dump(2) + "\n");
  }
  return kExitPass;
}

int cmd_ball_image(const CommandOptions& options, std::ostream& out) {
  const Config cfg = load_with_overrides(options);
  if (cfg.radii.empty()) throw ConfigError(cfg.source + ": sweep: empty radius grid");
  const MobiusMap map = build_map(cfg);
  const Decomposition dec = map.decomposition() ? *map.decomposition() : isometric_decomposition(map);
  Json images = Json::array();
  for (double r : cfg.radii) {
    if (r > dec.b.norm() * (1.0 + 1e-12)) {
      throw ConfigError(cfg.source + ": sweep: radius " + format_double(r) + " exceeds |b| = " +
                        format_double(dec.b.norm()) + "; the image is the exterior of a ball");
    }
    const auto image = ball_image(dec, r);
    if (const auto* ball = std::get_if<Ball>(&image)) {
      images.push_back({{"r", r}, {"kind", "ball"}, {"center", to_json(ball->center())}, {"radius", ball->radius()}});
    } else {
      const auto& hs = std::get<HalfSpace>(image);
      images.push_back(
          {{"r", r}, {"kind", "half_space"}, {"unit_normal", to_json(hs.unit_normal())}, {"offset", hs.offset()}});
    }
  }
  out << images.dump(2) << '\n';
  if (options.out_dir) {
    Json doc = header("ball-image", cfg);
    doc["decomposition"] = to_json(dec);
    doc["ball_images"] = images;
    write_file(fs::path(*options.out_dir) / "report.json", doc.dump(2) + "\n");
  }
  return kExitPass;
}

int cmd_sweep(const CommandOptions& options, std::ostream& out) {
  Stopwatch clock;
  const Config cfg = load_with_overrides(options);
  const Scenario scn = build_scenario(cfg);
  const MonotonicityReport rep = monotone_sweep(scn, cfg.radii, cfg.quadrature);
  const std::vector<bool> row_pass = sweep_row_pass(scn, rep);
  std::vector<CheckRecord> records;
  sweep_records(scn, rep, cfg.checks, records);

  const fs::path dir(options.out_dir.value_or("."));
  write_file(dir / "sweep.csv", sweep_csv(rep, row_pass));
  Json doc = header("sweep", cfg);
  doc["decomposition"] = to_json(decomposition_of(scn));
  doc["sweep"] = sweep_json(rep, row_pass);
  doc["checks"] = records_json(records);
  bool pass = true;
  for (bool p : row_pass) pass = pass && p;
  doc["pass"] = pass;
  doc["timing"] = {{"total_seconds", clock.seconds()}};
  write_file(dir / "report.json", doc.dump(2) + "\n");
  out << "wrote " << (dir / "sweep.csv").string() << " (" << rep.rows.size() << " rows), "
      << (pass ? "all rows pass" : "some rows FAIL") << '\n';
  return pass ? kExitPass : kExitCheckFailed;
}

template <typename F>
void guarded(std::vector<CheckRecord>& records, const std::string& name, const F& body) {
  try {
    body();
  } catch (const Error& e) {
    records.push_back(failed_check(name, e.what()));
  }
}

CheckRecord tolerance_record(std::string name, double value, double tol, Json details) {
  CheckRecord c;
  c.name = std::move(name);
  c.lhs = value;
  c.rhs = 0.0;
  c.residual = value;
  c.budget = tol;
  c.pass = evaluate(c.rule, c.residual, c.budget);
  c.details = std::move(details);
  return c;
}

int cmd_verify(const CommandOptions& options, std::ostream& out) {
  Stopwatch clock;
  const Config cfg = load_with_overrides(options);
  const Scenario scn = build_scenario(cfg);
  const fs::path dir(options.out_dir.value_or("."));
  Json doc = header("verify", cfg);
  doc["decomposition"] = to_json(decomposition_of(scn));
  std::vector<CheckRecord> records;
  Json timing = Json::object();
  const QuadratureSettings& q = cfg.quadrature;

  if (cfg.checks.volume_identity || cfg.checks.weighted_identity) {
    Stopwatch t;
    guarded(records, "sweep", [&] {
      const MonotonicityReport rep = monotone_sweep(scn, cfg.radii, q);
      const std::vector<bool> row_pass = sweep_row_pass(scn, rep);
      sweep_records(scn, rep, cfg.checks, records);
      write_file(dir / "sweep.csv", sweep_csv(rep, row_pass));
      doc["sweep"] = sweep_json(rep, row_pass);
    });
    timing["sweep"] = t.seconds();
  }
  const double s_first = s_of_r(cfg.radii.front(), scn.b(), scn.R());
  const double s_last = s_of_r(cfg.radii.back(), scn.b(), scn.R());
  const double s_mid = s_of_r(cfg.radii[cfg.radii.size() / 2], scn.b(), scn.R());
  if (cfg.checks.flux) {
    Stopwatch t;
    guarded(records, "flux", [&] {
      records.push_back(from_two_sided("flux at s = " + format_double(s_mid), flux_identity_check(scn, s_mid, q)));
    });
    timing["flux"] = t.seconds();
  }
  if (cfg.checks.coarea) {
    Stopwatch t;
    const double lo = cfg.radii.size() > 1 ? s_first : 0.5 * s_first;
    guarded(records, "coarea", [&] {
      records.push_back(from_two_sided("coarea on " + bracket(lo, s_last), coarea_check(scn, lo, s_last, q)));
    });
    timing["coarea"] = t.seconds();
  }
  if (cfg.checks.gradient) {
    Stopwatch t;
    guarded(records, "gradient", [&] {
      const GradientCheck g = gradient_check(scn);
      records.push_back(tolerance_record("gradient closed form vs finite differences (relative)", g.max_rel_error,
                                         1e-6, Json{{"samples", g.samples}}));
    });
    timing["gradient"] = t.seconds();
  }
  if (cfg.checks.divW) {
    Stopwatch t;
    guarded(records, "divW", [&] {
      const DivergenceSummary d = div_W_summary(scn);
      records.push_back(tolerance_record("div W closed form vs finite differences (relative)", d.max_rel_error, 1e-5,
                                         Json{{"samples", d.samples}, {"max_abs_closed", d.max_abs_closed}}));
    });
    timing["divW"] = t.seconds();
  }
  if (cfg.checks.prescribed_point) {
    Stopwatch t;
    guarded(records, "prescribed_point", [&] {
      const PrescribedPointResult p = prescribed_point_bound(scn.patch(), scn.center(), q);
      CheckRecord c;
      c.name = "prescribed point bound at a = phi(0)";
      c.rule = PassRule::AtLeast;
      c.lhs = p.area;
      c.rhs = p.bound;
      c.residual = p.slack;
      c.budget = p.budget;
      c.pass = p.pass;
      c.details = {{"a", to_json(scn.center())}, {"area_error", p.area_error}};
      records.push_back(c);
    });
    timing["prescribed_point"] = t.seconds();
  }
  timing["total_seconds"] = clock.seconds();
  const bool pass = all_pass(records);
  doc["checks"] = records_json(records);
  doc["pass"] = pass;
  doc["timing"] = timing;
  write_file(dir / "report.json", doc.dump(2) + "\n");
  print_records(records, out);
  out << (pass ? "all checks pass" : "some checks FAIL") << '\n';
  return pass ? kExitPass : kExitCheckFailed;
}

// Built-in regression scenarios with pinned budgets.
const char* const kSelftestDisk = R"(
ambient: {n: 3}
mobius:
  word: [{type: sphere, params: {center: [2, 0, 0], radius: 1}}]
surface:
  kind: flat_disk
  params: {point: [1.5, 0, 0], frame: [[0, 1, 0], [0, 0, 1]], extent: 1}
sweep: {radii: [0.3, 0.8, 1.4], r_max: 1.5}
)";

const char* const kSelftestCatenoid = R"(
ambient: {n: 3}
mobius:
  word: [{type: sphere, params: {center: [0, 0, 3], radius: 2}}]
surface:
  kind: catenoid
  params: {scale: 1}
  domain: {lo: [-pi, -0.9], hi: [pi, 0.9]}
sweep: {radii: [1.8, 1.85, 1.9]}
)";

const char* const kSelftestMirrored = R"(
ambient: {n: 3}
mobius:
  word:
    - {type: plane, params: {normal: [1, 0, 0], offset: 0}}
    - {type: sphere, params: {center: [0, 0, 3], radius: 2}}
surface:
  kind: catenoid
  params: {scale: 1}
  domain: {lo: [-pi, -0.9], hi: [pi, 0.9]}
  mirrors: [{normal: [1, 0, 0], offset: 0}]
sweep: {radii: [1.8, 1.85, 1.9]}
)";

int cmd_selftest(const CommandOptions& options, std::ostream& out) {
  std::vector<std::pair<std::string, bool>> results;
  const auto run = [&](const std::string& name, const std::function<bool()>& body) {
    bool ok = false;
    try {
      ok = body();
    } catch (const std::exception& e) {
      out << "  " << name << ": " << e.what() << '\n';
    }
    out << (ok ? "PASS " : "FAIL ") << name << '\n';
    results.emplace_back(name, ok);
  };
  const auto settings = [&](Config cfg) {
    if (options.tol) cfg.quadrature.tol = *options.tol;
    if (options.max_depth) cfg.quadrature.max_depth = *options.max_depth;
    return cfg;
  };

  run("flat disk: J = I = pi/4 within 1e-6 and constant", [&] {
    const Config cfg = settings(parse_config(kSelftestDisk, "selftest:disk"));
    const Scenario scn = build_scenario(cfg);
    const MonotonicityReport rep = monotone_sweep(scn, cfg.radii, cfg.quadrature);
    bool ok = rep.pass && rep.equality.constant;
    for (const auto& row : rep.rows) {
      ok = ok && std::abs(row.J.value - std::numbers::pi / 4) <= 1e-6 &&
           std::abs(row.I.value - std::numbers::pi / 4) <= 1e-6;
    }
    return ok;
  });
  MonotonicityReport catenoid_report;
  run("catenoid: identities within budget, J increasing", [&] {
    const Config cfg = settings(parse_config(kSelftestCatenoid, "selftest:catenoid"));
    const Scenario scn = build_scenario(cfg);
    catenoid_report = monotone_sweep(scn, cfg.radii, cfg.quadrature);
    bool ok = catenoid_report.pass;
    for (const auto& p : catenoid_report.pairs) ok = ok && p.volume.lhs > p.volume.budget;
    return ok;
  });
  run("mirrored catenoid reproduces J and I to 1e-9", [&] {
    const Config cfg = settings(parse_config(kSelftestMirrored, "selftest:mirrored"));
    const Scenario scn = build_scenario(cfg);
    const MonotonicityReport rep = monotone_sweep(scn, cfg.radii, cfg.quadrature);
    bool ok = rep.pass && rep.rows.size() == catenoid_report.rows.size();
    for (std::size_t i = 0; ok && i < rep.rows.size(); ++i) {
      ok = std::abs(rep.rows[i].J.value - catenoid_report.rows[i].J.value) <= 1e-9 &&
           std::abs(rep.rows[i].I.value - catenoid_report.rows[i].I.value) <= 1e-9;
    }
    return ok;
  });
  run("sigma_a level correspondence on 20 radii to 1e-12", [&] {
    VecN a = VecN::Zero(3);
    a(0) = 0.5;
    const MobiusMap map = make_sigma_a(a);
    const Decomposition dec = map.decomposition() ? *map.decomposition() : isometric_decomposition(map);
    const double a2 = a.squaredNorm();
    bool ok = true;
    for (int i = 1; i <= 20; ++i) {
      const double r = 1.9 * i / 21.0;
      const double expected = (1.0 - a2) * r * r / (1.0 - r * r * a2);
      ok = ok && std::abs(s_of_r(r, dec.b, dec.R) - expected) <= 1e-12 * std::max(1.0, expected);
    }
    return ok;
  });
  bool pass = true;
  for (const auto& r : results) pass = pass && r.second;
  out << (pass ? "selftest passed" : "selftest FAILED") << '\n';
  return pass ? kExitPass : kExitCheckFailed;
}

}  // namespace

int run_command(const std::string& command, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (command == "decompose") return cmd_decompose(options, out);
    if (command == "ball-image") return cmd_ball_image(options, out);
    if (command == "sweep") return cmd_sweep(options, out);
    if (command == "verify") return cmd_verify(options, out);
    if (command == "selftest") return cmd_selftest(options, out);
    err << "unknown command '" << command << "' (expected decompose, ball-image, sweep, verify or selftest)\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "math error: " << e.what() << '\n';
    return kExitMath;
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace mobius_mono::cli
