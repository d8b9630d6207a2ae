#include "imc/diagnostics.hpp"

#include <cmath>

#include "imc/errors.hpp"

namespace imc {

namespace {

void check_shapes(const Matrix& p, const Matrix& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols() || p.rows() == 0)
    throw input_error("matrix distance: shape mismatch");
}

}  // namespace

double rsmd(const Matrix& p, const Matrix& q) {
  check_shapes(p, q);
  const double n = static_cast<double>(p.rows() * p.cols());
  double ss = 0.0, denom = 0.0;
  for (std::size_t t = 0; t < p.data().size(); ++t) {
    const double d = p.data()[t] - q.data()[t];
    ss += d * d;
    denom += q.data()[t];
  }
  if (denom == 0.0) throw input_error("matrix distance: zero denominator matrix");
  return std::sqrt(ss / n) * n * 100.0 / denom;
}

double mad(const Matrix& p, const Matrix& q) {
  check_shapes(p, q);
  double sad = 0.0, denom = 0.0;
  for (std::size_t t = 0; t < p.data().size(); ++t) {
    sad += std::abs(p.data()[t] - q.data()[t]);
    denom += q.data()[t];
  }
  if (denom == 0.0) throw input_error("matrix distance: zero denominator matrix");
  return sad * 100.0 / denom;
}

ACFResult acf_squared(std::span<const double> returns, std::size_t max_lag) {
  if (max_lag < 1) throw input_error("acf: max_lag must be at least 1");
  const std::size_t t_len = returns.size();
  if (t_len <= max_lag) throw input_error("acf: series must be longer than max_lag");

  std::vector<double> x(t_len);
  for (std::size_t t = 0; t < t_len; ++t) x[t] = returns[t] * returns[t];
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(t_len);

  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(t_len);
  // Relative cutoff so a constant squared series is caught despite rounding.
  if (!(var > (mean * mean + 1e-300) * 1e-20))
    throw input_error("acf: degenerate variance of the squared series");

  ACFResult out;
  out.values.reserve(max_lag);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double cov = 0.0;
    for (std::size_t t = 0; t + lag < t_len; ++t) cov += (x[t] - mean) * (x[t + lag] - mean);
    cov /= static_cast<double>(t_len);
    out.values.push_back(cov / var);
  }
  return out;
}

ACFResult acf_squared(const DiscreteReturnSeries& J, std::size_t max_lag) {
  std::vector<double> values;
  values.reserve(J.size());
  for (int s : J.states) values.push_back(J.map.value_of(s));
  return acf_squared(values, max_lag);
}

std::size_t RegimeStructureReport::passed() const {
  std::size_t n = 0;
  for (const auto& c : checks)
    if (c.pass) ++n;
  return n;
}

RegimeStructureReport regime_structure_report(const RegimeModel& model) {
  RegimeStructureReport out;
  if (model.num_states() != 5) {
    out.reason = "not applicable: model does not have 5 return states";
    return out;
  }
  if (model.matrices.size() != 5) {
    out.reason = "not applicable: model does not have 5 volatility regimes";
    return out;
  }
  out.applicable = true;

  const auto& P = model.matrices.matrices;
  auto at = [&](std::size_t h, std::size_t i, std::size_t j) { return P[h](i, j); };
  auto add = [&](const std::string& family, int i1, int h1, double lhs, double rhs, bool gt) {
    out.checks.push_back({family, i1, h1, lhs, rhs, gt ? lhs > rhs : lhs < rhs});
  };

  // 1. Null-return occupancy decreases with volatility: p_{i,3}(h) > p_{i,3}(h+1).
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t h = 0; h < 4; ++h)
      add("null-return-occupancy-decreasing", static_cast<int>(i + 1), static_cast<int>(h + 1),
          at(h, i, 2), at(h + 1, i, 2), true);

  // 2. Extreme-return occupancy increases with volatility:
  //    p_{i,1}(h) < p_{i,1}(h+1) and p_{i,5}(h) < p_{i,5}(h+1).
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t h = 0; h < 4; ++h) {
      add("extreme-occupancy-increasing(j=1)", static_cast<int>(i + 1), static_cast<int>(h + 1),
          at(h, i, 0), at(h + 1, i, 0), false);
      add("extreme-occupancy-increasing(j=5)", static_cast<int>(i + 1), static_cast<int>(h + 1),
          at(h, i, 4), at(h + 1, i, 4), false);
    }

  // 3. Mean reversion: low-return rows lean to high-return targets and vice versa.
  for (std::size_t h = 0; h < 5; ++h) {
    for (std::size_t i : {0u, 1u})
      add("mean-reversion(low-row)", static_cast<int>(i + 1), static_cast<int>(h + 1),
          at(h, i, 0) + at(h, i, 1), at(h, i, 3) + at(h, i, 4), false);
    for (std::size_t i : {3u, 4u})
      add("mean-reversion(high-row)", static_cast<int>(i + 1), static_cast<int>(h + 1),
          at(h, i, 0) + at(h, i, 1), at(h, i, 3) + at(h, i, 4), true);
  }

  // 4. Null-return row: leans low for h <= 3, high for h >= 4.
  for (std::size_t h = 0; h < 3; ++h)
    add("null-row-tilt(low-vol)", 3, static_cast<int>(h + 1), at(h, 2, 0) + at(h, 2, 1),
        at(h, 2, 3) + at(h, 2, 4), true);
  for (std::size_t h = 3; h < 5; ++h)
    add("null-row-tilt(high-vol)", 3, static_cast<int>(h + 1), at(h, 2, 0) + at(h, 2, 1),
        at(h, 2, 3) + at(h, 2, 4), false);

  return out;
}

}  // namespace imc
