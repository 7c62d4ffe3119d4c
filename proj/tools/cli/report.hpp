#pragma once

// JSON report and CSV table serialization.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "mobius_mono/monotonicity.hpp"

namespace mobius_mono::cli {

using Json = nlohmann::ordered_json;

enum class PassRule {
  Within,    // |residual| <= budget
  AtLeast,   // residual >= -budget
};

struct CheckRecord {
  std::string name;
  PassRule rule = PassRule::Within;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double budget = 0.0;
  bool pass = false;
  std::string error;  // non-empty when the check threw
  Json details = Json::object();
};

bool evaluate(PassRule rule, double residual, double budget);

CheckRecord from_residual(std::string name, const IdentityResidual& r);
CheckRecord from_two_sided(std::string name, const TwoSidedCheck& c);
CheckRecord failed_check(std::string name, const std::string& error);

/// Serializes a record; the pass flag is recomputed from the written numbers.
Json to_json(const CheckRecord& c);

Json to_json(const VecN& v);
Json to_json(const Decomposition& dec);
Json to_json(const QuadratureResult& q);
Json yaml_to_json(const YAML::Node& node);

/// %.17g, with "nan" / "inf" / "-inf" for non-finite values.
std::string format_double(double v);

inline constexpr const char* kSweepHeader =
    "r,s,J,J_err,I,I_err,QA,QI,vol_lhs,vol_rhs,vol_residual,vol_budget,wt_lhs,wt_rhs,wt_residual,wt_budget,pass";

/// Per-row pass flags of a sweep: the pair checks against the previous radius
/// (monotonicity and both identities) together with J = R^k Q_A at the row.
std::vector<bool> sweep_row_pass(const Scenario& scn, const MonotonicityReport& report);

std::string sweep_csv(const MonotonicityReport& report, const std::vector<bool>& row_pass);

}  // namespace mobius_mono::cli
