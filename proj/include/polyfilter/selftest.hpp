#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace polyfilter {

struct SuiteResult {
  std::string name;
  int passed = 0;
  int total = 0;
  std::vector<std::string> failures;

  bool ok() const { return passed == total && total > 0; }
};

struct SelftestReport {
  std::vector<SuiteResult> suites;
  double seconds = 0.0;

  bool ok() const;
};

/// Runs the oracle suites: recurrence coefficients, monic-Laguerre expansion,
/// Gauss-Laguerre orthogonality, dense-oracle equivalence of the convolution
/// layer, and finite-difference gradients over every parameter group.
SelftestReport run_selftest();

/// One line per suite plus a verdict line.
void print_report(const SelftestReport& report, std::ostream& os);

}  // namespace polyfilter
