#pragma once

#include <span>
#include <string>
#include <vector>

#include "imc/estimation.hpp"

namespace imc {

// %RSMD = sqrt(sum_ij (p_ij - q_ij)^2 / n) * n * 100 / sum_ij q_ij, n = entry count.
double rsmd(const Matrix& p, const Matrix& q);

// %MAD = sum_ij |p_ij - q_ij| * 100 / sum_ij q_ij.
double mad(const Matrix& p, const Matrix& q);

// Autocorrelation of squared values at lags 1..max_lag, biased (1/T)
// covariance estimator. Lag 0 is 1 by definition and not stored.
struct ACFResult {
  std::vector<double> values;

  std::size_t max_lag() const { return values.size(); }
  double at(std::size_t lag) const { return lag == 0 ? 1.0 : values[lag - 1]; }
};

ACFResult acf_squared(std::span<const double> returns, std::size_t max_lag);
ACFResult acf_squared(const DiscreteReturnSeries& J, std::size_t max_lag);

struct RegimeCheck {
  std::string family;
  int source_state = 0;  // 1-based state row, 0 when the check has no row
  int regime = 0;        // 1-based volatility level h
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

// Structural inequalities of a five-state, five-regime model: the null-return
// column shrinking with volatility, the extreme columns growing with it,
// mean reversion from the extreme rows, and the null-return row tilting from
// low-return targets at low volatility to high-return targets at high volatility.
struct RegimeStructureReport {
  bool applicable = false;
  std::string reason;
  std::vector<RegimeCheck> checks;

  std::size_t passed() const;
  bool all_pass() const { return applicable && passed() == checks.size(); }
};

RegimeStructureReport regime_structure_report(const RegimeModel& model);

}  // namespace imc
