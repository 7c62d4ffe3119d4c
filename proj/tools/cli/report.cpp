#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace mobius_mono::cli {

bool evaluate(PassRule rule, double residual, double budget) {
  switch (rule) {
    case PassRule::Within: return std::abs(residual) <= budget;
    case PassRule::AtLeast: return residual >= -budget;
  }
  return false;
}

CheckRecord from_residual(std::string name, const IdentityResidual& r) {
  CheckRecord c;
  c.name = std::move(name);
  c.lhs = r.lhs;
  c.rhs = r.rhs;
  c.residual = r.residual;
  c.budget = r.budget;
  c.pass = r.pass;
  c.details["tol_met"] = r.tol_met;
  return c;
}

CheckRecord from_two_sided(std::string name, const TwoSidedCheck& t) {
  CheckRecord c;
  c.name = std::move(name);
  c.lhs = t.lhs;
  c.rhs = t.rhs;
  c.residual = t.lhs - t.rhs;
  c.budget = t.budget;
  c.pass = t.pass;
  return c;
}

CheckRecord failed_check(std::string name, const std::string& error) {
  CheckRecord c;
  c.name = std::move(name);
  c.lhs = c.rhs = c.residual = std::nan("");
  c.budget = 0.0;
  c.pass = false;
  c.error = error;
  return c;
}

namespace {

Json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

Json to_json(const CheckRecord& c) {
  Json j;
  j["name"] = c.name;
  j["rule"] = c.rule == PassRule::Within ? "abs(residual) <= budget" : "residual >= -budget";
  j["lhs"] = number(c.lhs);
  j["rhs"] = number(c.rhs);
  j["residual"] = number(c.residual);
  j["budget"] = number(c.budget);
  j["pass"] = c.error.empty() && evaluate(c.rule, c.residual, c.budget);
  if (!c.error.empty()) j["error"] = c.error;
  if (!c.details.empty()) j["details"] = c.details;
  return j;
}

Json to_json(const VecN& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_json(const Decomposition& dec) {
  Json j;
  j["b"] = to_json(dec.b);
  j["R"] = dec.R;
  Json linear = Json::array();
  const MatN& m = dec.psi.linear();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    linear.push_back(row);
  }
  j["psi"] = {{"linear", linear}, {"translation", to_json(dec.psi.translation())}};
  j["a"] = to_json(dec.a);
  j["phi_of_origin"] = to_json(dec.phi_of_origin());
  j["direction"] = to_json(dec.direction);
  return j;
}

Json to_json(const QuadratureResult& q) {
  return Json{{"value", number(q.value)},
              {"error_estimate", number(q.error_estimate)},
              {"cells_used", q.cells_used},
              {"depth_hit", q.depth_hit},
              {"tol_met", q.tol_met}};
}

Json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Sequence: {
      Json a = Json::array();
      for (const auto& item : node) a.push_back(yaml_to_json(item));
      return a;
    }
    case YAML::NodeType::Map: {
      Json o = Json::object();
      for (const auto& kv : node) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return o;
    }
    case YAML::NodeType::Scalar: {
      const auto s = node.as<std::string>();
      if (s == "true" || s == "false") return s == "true";
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
      } catch (const std::logic_error&) {
      }
      return s;
    }
    default: return nullptr;
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<bool> sweep_row_pass(const Scenario& scn, const MonotonicityReport& report) {
  const double Rk = std::pow(scn.R(), scn.k());
  std::vector<bool> out;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const RadiusRow& row = report.rows[i];
    const IdentityResidual scaling =
        make_residual(row.J.value, Rk * row.QA.value, row.J.error_estimate + Rk * row.QA.error_estimate, true);
    bool pass = scaling.pass;
    if (i > 0) {
      const PairRow& p = report.pairs[i - 1];
      pass = pass && p.volume.pass && p.weighted.pass && p.J_monotone && p.I_monotone;
    }
    out.push_back(pass);
  }
  return out;
}

std::string sweep_csv(const MonotonicityReport& report, const std::vector<bool>& row_pass) {
  std::ostringstream os;
  os << kSweepHeader << '\n';
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const RadiusRow& r = report.rows[i];
    os << format_double(r.r) << ',' << format_double(r.s) << ',' << format_double(r.J.value) << ','
       << format_double(r.J.error_estimate) << ',' << format_double(r.I.value) << ','
       << format_double(r.I.error_estimate) << ',' << format_double(r.QA.value) << ','
       << format_double(r.QI.value) << ',';
    if (i == 0) {
      os << ",,,,,,,,";
    } else {
      const PairRow& p = report.pairs[i - 1];
      for (const IdentityResidual* id : {&p.volume, &p.weighted}) {
        os << format_double(id->lhs) << ',' << format_double(id->rhs) << ',' << format_double(id->residual) << ','
           << format_double(id->budget) << ',';
      }
    }
    os << (row_pass[i] ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace mobius_mono::cli
