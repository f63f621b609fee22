#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace kma {

enum class EntryKind { Inequality, Identity, Report };

/// Inequality entries pass iff lhs <= rhs + tolerance; identity entries iff |lhs - rhs| <= tolerance.
/// Report entries are informational and never gate.
struct EstimateEntry {
  std::string name;
  EntryKind kind = EntryKind::Inequality;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::string context;
};

EstimateEntry inequality_entry(std::string name, double lhs, double rhs, double tol, std::string context = {});
EstimateEntry identity_entry(std::string name, double lhs, double rhs, double tol, std::string context = {});
EstimateEntry report_entry(std::string name, double lhs, double rhs, std::string context = {});

const char* to_string(EntryKind k);

struct EstimateReport {
  std::vector<EstimateEntry> entries;
  std::map<std::string, double> constants;

  void add(EstimateEntry e) { entries.push_back(std::move(e)); }
  void merge(const EstimateReport& other);
  bool all_pass() const;
  std::vector<const EstimateEntry*> failures() const;
  const EstimateEntry* find(const std::string& name) const;
  /// Entries in name order.
  void sort();

  nlohmann::json to_json() const;
  std::string to_table() const;
};

}  // namespace kma
