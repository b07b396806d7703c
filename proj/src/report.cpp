#include "tailstorm/report.hpp"

namespace tailstorm {

nlohmann::ordered_json TestReport::to_json() const {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["statistic"] = statistic;
  j["reference"] = reference;
  if (p_value) j["p_value"] = *p_value;
  if (z_score) j["z_score"] = *z_score;
  j["threshold"] = threshold;
  j["verdict"] = pass ? "pass" : "fail";
  j["n_used"] = n_used;
  j["notes"] = notes;
  return j;
}

nlohmann::ordered_json reports_to_json(const std::vector<TestReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(r.to_json());
  return arr;
}

}  // namespace tailstorm
