#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

namespace gpregime {

/// One named verification entry: measured quantities plus pass/fail checks
/// against artifact thresholds.
struct LemmaReport {
  std::string id;
  std::vector<std::pair<std::string, double>> quantities;
  std::vector<std::pair<std::string, bool>> checks;
  std::string note;

  void add(std::string name, double value) { quantities.emplace_back(std::move(name), value); }
  void check(std::string name, bool ok) { checks.emplace_back(std::move(name), ok); }
  double value(const std::string& name) const;
  bool pass() const;
};

nlohmann::ordered_json to_json(const LemmaReport& report);

}  // namespace gpregime
