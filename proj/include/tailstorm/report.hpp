#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace tailstorm {

/// Outcome of one statistical check. Serialized schema is stable; see
/// docs/schemas.md.
struct TestReport {
  std::string id;
  double statistic = 0.0;
  std::string reference;  // description of the null: analytic cdf | permutation | binomial | normal-z
  std::optional<double> p_value;
  std::optional<double> z_score;
  double threshold = 0.0;  // p-threshold or z-threshold, per `reference`
  bool pass = false;
  std::map<std::string, double> n_used;  // sample counts by role
  std::vector<std::string> notes;        // truncation/weight warnings

  nlohmann::ordered_json to_json() const;
};

nlohmann::ordered_json reports_to_json(const std::vector<TestReport>& reports);

}  // namespace tailstorm
