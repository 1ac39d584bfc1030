#include "gpregime/report.hpp"

#include <algorithm>
#include <cmath>

#include "gpregime/error.hpp"

namespace gpregime {

double LemmaReport::value(const std::string& name) const {
  for (const auto& [key, v] : quantities)
    if (key == name) return v;
  fail(ErrorKind::InvalidInput, "report " + id + " has no quantity '" + name + "'");
}

bool LemmaReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
}

nlohmann::ordered_json to_json(const LemmaReport& report) {
  nlohmann::ordered_json j;
  j["id"] = report.id;
  auto& q = j["quantities"] = nlohmann::ordered_json::object();
  for (const auto& [key, v] : report.quantities) {
    if (std::isfinite(v))
      q[key] = v;
    else
      q[key] = std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  }
  auto& c = j["checks"] = nlohmann::ordered_json::object();
  for (const auto& [key, ok] : report.checks) c[key] = ok;
  j["pass"] = report.pass();
  if (!report.note.empty()) j["note"] = report.note;
  return j;
}

}  // namespace gpregime
