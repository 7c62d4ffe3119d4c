#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace mobius_mono::cli {

namespace {

std::string at(const YAML::Node& node, const std::string& path) {
  const YAML::Mark mark = node.Mark();
  if (mark.line < 0) return path;
  return path + " (line " + std::to_string(mark.line + 1) + ")";
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& path, const std::string& what) {
  throw ConfigError(at(node, path) + ": " + what);
}

void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) fail(node, path, "expected a mapping");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!keys.count(key)) fail(kv.first, path + "." + key, "unknown key");
  }
}

YAML::Node require(const YAML::Node& parent, const std::string& path, const char* key) {
  const YAML::Node child = parent[key];
  if (!child) fail(parent, path + "." + key, "missing required field");
  return child;
}

// Numbers may also be written as pi, -pi, 2pi or 0.5*pi.
double number(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(node, path, "expected a number");
  const auto text = node.as<std::string>();
  std::string s = text;
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    std::string factor = s.substr(0, s.size() - 2);
    if (!factor.empty() && factor.back() == '*') factor.pop_back();
    double f = 1.0;
    if (factor == "-") {
      f = -1.0;
    } else if (!factor.empty() && factor != "+") {
      try {
        std::size_t used = 0;
        f = std::stod(factor, &used);
        if (used != factor.size()) fail(node, path, "cannot parse '" + text + "'");
      } catch (const std::logic_error&) {
        fail(node, path, "cannot parse '" + text + "'");
      }
    }
    return f * std::numbers::pi;
  }
  try {
    const double v = node.as<double>();
    if (!std::isfinite(v)) fail(node, path, "must be finite");
    return v;
  } catch (const YAML::BadConversion&) {
    fail(node, path, "expected a number, got '" + text + "'");
  }
}

int integer(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<int>();
  } catch (const YAML::BadConversion&) {
    fail(node, path, "expected an integer");
  }
}

bool boolean(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<bool>();
  } catch (const YAML::BadConversion&) {
    fail(node, path, "expected true or false");
  }
}

std::string text(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(node, path, "expected a string");
  return node.as<std::string>();
}

VecN vector(const YAML::Node& node, const std::string& path, int n) {
  if (!node.IsSequence()) fail(node, path, "expected a list of numbers");
  if (n > 0 && static_cast<int>(node.size()) != n) {
    fail(node, path, "expected " + std::to_string(n) + " entries, got " + std::to_string(node.size()));
  }
  if (node.size() == 0 || node.size() > static_cast<std::size_t>(kMaxDim)) {
    fail(node, path, "vector length must be between 1 and " + std::to_string(kMaxDim));
  }
  VecN v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(node[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

WordEntry parse_word_entry(const YAML::Node& node, const std::string& path, int n) {
  check_keys(node, path, {"type", "params"});
  WordEntry e;
  e.type = text(require(node, path, "type"), path + ".type");
  const YAML::Node params = node["params"];
  const std::string pp = path + ".params";
  if (e.type == "sphere") {
    if (!params) fail(node, pp, "missing required field");
    check_keys(params, pp, {"center", "radius"});
    e.center = vector(require(params, pp, "center"), pp + ".center", n);
    e.radius = number(require(params, pp, "radius"), pp + ".radius");
    if (!(e.radius > 0.0)) fail(params["radius"], pp + ".radius", "must be positive");
  } else if (e.type == "plane") {
    if (!params) fail(node, pp, "missing required field");
    check_keys(params, pp, {"normal", "offset"});
    e.normal = vector(require(params, pp, "normal"), pp + ".normal", n);
    e.offset = params["offset"] ? number(params["offset"], pp + ".offset") : 0.0;
    if (!(e.normal.norm() > 0.0)) fail(params["normal"], pp + ".normal", "must be nonzero");
  } else if (e.type == "named_sigma_a" || e.type == "named_phi_a") {
    if (!params) fail(node, pp, "missing required field");
    check_keys(params, pp, {"a"});
    e.a = vector(require(params, pp, "a"), pp + ".a", n);
    const double an = e.a.norm();
    if (e.type == "named_sigma_a" && !(an > 0.0 && an < 1.0)) {
      fail(params["a"], pp + ".a", "named_sigma_a needs 0 < |a| < 1");
    }
    if (e.type == "named_phi_a" && !(an < 1.0)) fail(params["a"], pp + ".a", "named_phi_a needs |a| < 1");
  } else {
    fail(node["type"], path + ".type",
         "unknown map type '" + e.type + "' (expected sphere, plane, named_sigma_a or named_phi_a)");
  }
  return e;
}

const std::set<std::string>& surface_kinds() {
  static const std::set<std::string> kinds{"flat_disk", "catenoid", "helicoid", "enneper",
                                           "complex_parabola", "round_sphere"};
  return kinds;
}

SurfaceConfig parse_surface(const YAML::Node& node, int n) {
  const std::string path = "surface";
  check_keys(node, path, {"kind", "params", "domain", "mirrors"});
  SurfaceConfig s;
  s.kind = text(require(node, path, "kind"), "surface.kind");
  if (!surface_kinds().count(s.kind)) {
    fail(node["kind"], "surface.kind", "unknown surface kind '" + s.kind + "'");
  }
  const YAML::Node params = node["params"] ? node["params"] : YAML::Node(YAML::NodeType::Map);
  const std::string pp = "surface.params";
  int k = 2;
  if (s.kind == "flat_disk") {
    check_keys(params, pp, {"point", "frame", "extent"});
    s.point = vector(require(params, pp, "point"), pp + ".point", n);
    const YAML::Node frame = require(params, pp, "frame");
    if (!frame.IsSequence() || frame.size() == 0) fail(frame, pp + ".frame", "expected a list of vectors");
    for (std::size_t i = 0; i < frame.size(); ++i) {
      s.frame.push_back(vector(frame[i], pp + ".frame[" + std::to_string(i) + "]", n));
    }
    k = static_cast<int>(s.frame.size());
    if (params["extent"]) s.extent = number(params["extent"], pp + ".extent");
    if (!(s.extent > 0.0)) fail(params["extent"], pp + ".extent", "must be positive");
  } else if (s.kind == "catenoid") {
    check_keys(params, pp, {"scale"});
    if (params["scale"]) s.scale = number(params["scale"], pp + ".scale");
  } else if (s.kind == "helicoid") {
    check_keys(params, pp, {"pitch"});
    if (params["pitch"]) s.pitch = number(params["pitch"], pp + ".pitch");
  } else if (s.kind == "round_sphere") {
    check_keys(params, pp, {"radius"});
    if (params["radius"]) s.radius = number(params["radius"], pp + ".radius");
  } else {
    check_keys(params, pp, {});
  }
  const int needed_n = s.kind == "complex_parabola" ? 4 : 3;
  if (s.kind != "flat_disk" && n != needed_n) {
    fail(node["kind"], "surface.kind", s.kind + " lives in R^" + std::to_string(needed_n) +
                                           " but ambient.n = " + std::to_string(n));
  }
  if (const YAML::Node dom = node["domain"]) {
    check_keys(dom, "surface.domain", {"lo", "hi"});
    ParamBox box{vector(require(dom, "surface.domain", "lo"), "surface.domain.lo", k),
                 vector(require(dom, "surface.domain", "hi"), "surface.domain.hi", k)};
    if (!((box.hi - box.lo).minCoeff() > 0.0)) fail(dom, "surface.domain", "needs lo < hi in every coordinate");
    s.domain = box;
  }
  if (const YAML::Node mirrors = node["mirrors"]) {
    if (!mirrors.IsSequence()) fail(mirrors, "surface.mirrors", "expected a list of planes");
    for (std::size_t i = 0; i < mirrors.size(); ++i) {
      const std::string mp = "surface.mirrors[" + std::to_string(i) + "]";
      check_keys(mirrors[i], mp, {"normal", "offset"});
      const VecN normal = vector(require(mirrors[i], mp, "normal"), mp + ".normal", n);
      if (!(normal.norm() > 0.0)) fail(mirrors[i], mp + ".normal", "must be nonzero");
      const double offset = mirrors[i]["offset"] ? number(mirrors[i]["offset"], mp + ".offset") : 0.0;
      s.mirrors.push_back(Hyperplane::normalized(normal, offset));
    }
  }
  return s;
}

void parse_sweep(const YAML::Node& node, Config& cfg) {
  const std::string path = "sweep";
  check_keys(node, path, {"radii", "r_lo", "r_hi", "count", "spacing", "r_max"});
  if (node["radii"]) {
    if (node["r_lo"] || node["r_hi"] || node["count"] || node["spacing"]) {
      fail(node, path, "give either radii or r_lo/r_hi/count, not both");
    }
    const YAML::Node radii = node["radii"];
    if (!radii.IsSequence()) fail(radii, "sweep.radii", "expected a list of numbers");
    for (std::size_t i = 0; i < radii.size(); ++i) {
      cfg.radii.push_back(number(radii[i], "sweep.radii[" + std::to_string(i) + "]"));
    }
  } else if (node["r_lo"] || node["r_hi"] || node["count"]) {
    const double lo = number(require(node, path, "r_lo"), "sweep.r_lo");
    const double hi = number(require(node, path, "r_hi"), "sweep.r_hi");
    const int count = integer(require(node, path, "count"), "sweep.count");
    const std::string spacing = node["spacing"] ? text(node["spacing"], "sweep.spacing") : "linear";
    if (spacing != "linear" && spacing != "log") {
      fail(node["spacing"], "sweep.spacing", "expected linear or log");
    }
    if (count < 0) fail(node["count"], "sweep.count", "must be nonnegative");
    if (!(lo > 0.0)) fail(node["r_lo"], "sweep.r_lo", "must be positive");
    if (count > 1 && !(hi > lo)) fail(node["r_hi"], "sweep.r_hi", "must exceed r_lo");
    for (int i = 0; i < count; ++i) {
      const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      cfg.radii.push_back(spacing == "linear" ? lo + t * (hi - lo) : lo * std::pow(hi / lo, t));
    }
  }
  if (node["r_max"]) cfg.r_max = number(node["r_max"], "sweep.r_max");
  if (cfg.radii.empty()) fail(node, path, "empty radius grid");
  for (std::size_t i = 0; i < cfg.radii.size(); ++i) {
    if (!(cfg.radii[i] > 0.0)) fail(node, path, "radii must be positive");
    if (i > 0 && !(cfg.radii[i] > cfg.radii[i - 1])) fail(node, path, "radii must be strictly increasing");
  }
  if (cfg.r_max && *cfg.r_max < cfg.radii.back()) {
    fail(node["r_max"], "sweep.r_max", "must be at least the largest radius");
  }
}

Config parse_document(const YAML::Node& doc, const std::string& source) {
  Config cfg;
  cfg.source = source;
  cfg.document = doc;
  if (!doc.IsMap()) throw ConfigError(source + ": top level must be a mapping");
  check_keys(doc, "config", {"ambient", "mobius", "surface", "sweep", "quadrature", "checks"});

  const YAML::Node ambient = require(doc, "config", "ambient");
  check_keys(ambient, "ambient", {"n"});
  cfg.n = integer(require(ambient, "ambient", "n"), "ambient.n");
  if (cfg.n < 2 || cfg.n > kMaxDim) fail(ambient["n"], "ambient.n", "must be between 2 and " + std::to_string(kMaxDim));

  const YAML::Node mobius = require(doc, "config", "mobius");
  check_keys(mobius, "mobius", {"word"});
  const YAML::Node word = require(mobius, "mobius", "word");
  if (!word.IsSequence() || word.size() == 0) fail(word, "mobius.word", "expected a nonempty list");
  for (std::size_t i = 0; i < word.size(); ++i) {
    cfg.word.push_back(parse_word_entry(word[i], "mobius.word[" + std::to_string(i) + "]", cfg.n));
  }

  if (const YAML::Node surface = doc["surface"]) cfg.surface = parse_surface(surface, cfg.n);
  if (const YAML::Node sweep = doc["sweep"]) parse_sweep(sweep, cfg);

  if (const YAML::Node q = doc["quadrature"]) {
    check_keys(q, "quadrature", {"tol", "max_depth"});
    if (q["tol"]) cfg.quadrature.tol = number(q["tol"], "quadrature.tol");
    if (q["max_depth"]) cfg.quadrature.max_depth = integer(q["max_depth"], "quadrature.max_depth");
    if (!(cfg.quadrature.tol > 0.0)) fail(q["tol"], "quadrature.tol", "must be positive");
    if (cfg.quadrature.max_depth < 1 || cfg.quadrature.max_depth > 30) {
      fail(q["max_depth"], "quadrature.max_depth", "must be between 1 and 30");
    }
  }

  if (const YAML::Node checks = doc["checks"]) {
    check_keys(checks, "checks", {"volume_identity", "weighted_identity", "flux", "coarea", "gradient", "divW",
                                  "prescribed_point"});
    const auto flag = [&](const char* key, bool& out) {
      if (checks[key]) out = boolean(checks[key], std::string("checks.") + key);
    };
    flag("volume_identity", cfg.checks.volume_identity);
    flag("weighted_identity", cfg.checks.weighted_identity);
    flag("flux", cfg.checks.flux);
    flag("coarea", cfg.checks.coarea);
    flag("gradient", cfg.checks.gradient);
    flag("divW", cfg.checks.divW);
    flag("prescribed_point", cfg.checks.prescribed_point);
  }
  return cfg;
}

}  // namespace

Config parse_config(const std::string& text_in, const std::string& source) {
  try {
    return parse_document(YAML::Load(text_in), source);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ": line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
}

Config load_config(const std::string& path) {
  try {
    return parse_document(YAML::LoadFile(path), path);
  } catch (const YAML::BadFile&) {
    throw ConfigError(path + ": cannot open config file");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(path + ": line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
}

std::vector<Reflection> build_word(const Config& cfg) {
  std::vector<Reflection> word;
  for (const auto& e : cfg.word) {
    if (e.type == "sphere") {
      word.emplace_back(Sphere(e.center, e.radius));
    } else if (e.type == "plane") {
      word.emplace_back(Hyperplane::normalized(e.normal, e.offset));
    } else {
      const MobiusMap named = e.type == "named_sigma_a" ? make_sigma_a(e.a) : make_phi_a(e.a);
      word.insert(word.end(), named.word().begin(), named.word().end());
    }
  }
  return word;
}

MobiusMap build_map(const Config& cfg) { return MobiusMap(build_word(cfg)); }

ParametricPatch build_patch(const Config& cfg) {
  if (!cfg.surface) throw ConfigError(cfg.source + ": surface: missing required section");
  const SurfaceConfig& s = *cfg.surface;
  std::optional<ParametricPatch> patch;
  try {
    if (s.kind == "flat_disk") {
      MatN cols(cfg.n, static_cast<Eigen::Index>(s.frame.size()));
      for (std::size_t i = 0; i < s.frame.size(); ++i) cols.col(static_cast<Eigen::Index>(i)) = s.frame[i];
      patch = flat_disk(s.point, orthonormal_frame(cols), s.extent);
    } else if (s.kind == "catenoid") {
      patch = catenoid(s.scale);
    } else if (s.kind == "helicoid") {
      patch = helicoid(s.pitch);
    } else if (s.kind == "enneper") {
      patch = enneper();
    } else if (s.kind == "complex_parabola") {
      patch = complex_parabola();
    } else {
      patch = round_sphere(s.radius);
    }
    if (s.domain) patch = patch->with_domain(*s.domain);
  } catch (const Error& e) {
    throw ConfigError(cfg.source + ": surface: " + e.what());
  }
  for (const auto& plane : s.mirrors) patch = patch->transformed(Isometry::mirror(plane));
  return *patch;
}

Scenario build_scenario(const Config& cfg) {
  if (cfg.radii.empty()) throw ConfigError(cfg.source + ": sweep: empty radius grid");
  const ParametricPatch patch = build_patch(cfg);
  const std::vector<Reflection> word = build_word(cfg);
  const bool single_sphere = word.size() == 1 && std::holds_alternative<Sphere>(word.front());
  std::optional<MobiusMap> map;
  VecN b;
  if (single_sphere) {
    b = std::get<Sphere>(word.front()).center();
  } else {
    map.emplace(word);
    b = map->decomposition() ? map->decomposition()->b : isometric_decomposition(*map).b;
  }
  if (b.norm() < 1e-12) throw Error(ErrorCode::OriginIsPole, "origin is the pole of the map");
  const double limit = 0.99 * b.norm();
  const double r_max = cfg.r_max.value_or(cfg.radii.back());
  if (r_max > limit) {
    throw ConfigError(cfg.source + ": sweep: radius " + std::to_string(r_max) + " exceeds 0.99|b| = " +
                      std::to_string(limit) +
                      " (degenerate-radius rule: radii must stay below 0.99|b|, where the ball image "
                      "degenerates to a half-space)");
  }
  ScenarioOptions options;
  options.r_max = r_max;
  if (single_sphere) {
    const auto& sphere = std::get<Sphere>(word.front());
    return Scenario::reflection(sphere.center(), sphere.radius(), patch, options);
  }
  return Scenario::mobius(*map, patch, options);
}

}  // namespace mobius_mono::cli
