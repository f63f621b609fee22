#include "kma/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace kma {

EstimateEntry inequality_entry(std::string name, double lhs, double rhs, double tol, std::string context) {
  const bool pass = lhs <= rhs + tol;
  return {std::move(name), EntryKind::Inequality, lhs, rhs, tol, pass, std::move(context)};
}

EstimateEntry identity_entry(std::string name, double lhs, double rhs, double tol, std::string context) {
  const bool pass = std::abs(lhs - rhs) <= tol;
  return {std::move(name), EntryKind::Identity, lhs, rhs, tol, pass, std::move(context)};
}

EstimateEntry report_entry(std::string name, double lhs, double rhs, std::string context) {
  return {std::move(name), EntryKind::Report, lhs, rhs, 0.0, true, std::move(context)};
}

const char* to_string(EntryKind k) {
  switch (k) {
    case EntryKind::Inequality: return "inequality";
    case EntryKind::Identity: return "identity";
    default: return "report";
  }
}

void EstimateReport::merge(const EstimateReport& other) {
  entries.insert(entries.end(), other.entries.begin(), other.entries.end());
  for (const auto& [k, v] : other.constants) constants[k] = v;
}

bool EstimateReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const EstimateEntry& e) { return e.kind == EntryKind::Report || e.pass; });
}

std::vector<const EstimateEntry*> EstimateReport::failures() const {
  std::vector<const EstimateEntry*> out;
  for (const auto& e : entries)
    if (e.kind != EntryKind::Report && !e.pass) out.push_back(&e);
  return out;
}

const EstimateEntry* EstimateReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

void EstimateReport::sort() {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const EstimateEntry& a, const EstimateEntry& b) { return a.name < b.name; });
}

namespace {

// JSON has no NaN/Inf; those become strings.
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

nlohmann::json EstimateReport::to_json() const {
  nlohmann::json j;
  j["all_pass"] = all_pass();
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries) {
    j["entries"].push_back({{"name", e.name},
                            {"kind", to_string(e.kind)},
                            {"lhs", number(e.lhs)},
                            {"rhs", number(e.rhs)},
                            {"tolerance", number(e.tolerance)},
                            {"pass", e.pass},
                            {"context", e.context}});
  }
  j["empirical_constants"] = nlohmann::json::object();
  for (const auto& [k, v] : constants) j["empirical_constants"][k] = number(v);
  return j;
}

std::string EstimateReport::to_table() const {
  std::size_t wname = 4;
  for (const auto& e : entries) wname = std::max(wname, e.name.size());
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %-10s  %14s  %14s  %9s  %-6s  %s\n", static_cast<int>(wname), "name", "kind",
                "lhs", "rhs", "tol", "status", "context");
  os << buf;
  for (const auto& e : entries) {
    const char* status = e.kind == EntryKind::Report ? "info" : (e.pass ? "PASS" : "FAIL");
    std::snprintf(buf, sizeof buf, "%-*s  %-10s  %14.6e  %14.6e  %9.2e  %-6s  ", static_cast<int>(wname),
                  e.name.c_str(), to_string(e.kind), e.lhs, e.rhs, e.tolerance, status);
    os << buf << e.context << '\n';
  }
  if (!constants.empty()) {
    os << "\nempirical constants\n";
    for (const auto& [k, v] : constants) {
      std::snprintf(buf, sizeof buf, "  %-*s  %.10g\n", static_cast<int>(wname), k.c_str(), v);
      os << buf;
    }
  }
  return os.str();
}

}  // namespace kma
