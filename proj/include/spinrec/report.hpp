#pragma once

#include <string>
#include <vector>

namespace spinrec {

/// Outcome of a batch of exact checks; keeps every failure description.
struct Report {
  long checks = 0;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
  const std::string first_failure() const { return failures.empty() ? std::string() : failures.front(); }

  void record(bool ok, const std::string& what) {
    ++checks;
    if (!ok) failures.push_back(what);
  }

  void merge(const Report& other) {
    checks += other.checks;
    failures.insert(failures.end(), other.failures.begin(), other.failures.end());
  }

  std::string summary() const {
    if (passed()) return std::to_string(checks) + " checks passed";
    return std::to_string(failures.size()) + " of " + std::to_string(checks) + " checks failed; first: " + failures.front();
  }
};

}  // namespace spinrec
