#include "imc/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "imc/errors.hpp"

namespace imc {

std::size_t Partition::interval_of(double v) const {
  return static_cast<std::size_t>(
      std::lower_bound(thresholds.begin(), thresholds.end(), v) - thresholds.begin());
}

void Partition::validate() const {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!std::isfinite(thresholds[i])) throw input_error("partition threshold not finite");
    if (i > 0 && !(thresholds[i - 1] < thresholds[i]))
      throw input_error("partition thresholds must be strictly increasing");
  }
}

std::int64_t CountTensor::total() const {
  std::int64_t s = 0;
  for (const auto& c : per_interval) s += c.total();
  return s;
}

void RegimeModel::validate() const {
  spec.map.validate();
  if (spec.memory < 1) throw input_error("regime model: memory must be positive");
  partition.validate();
  if (matrices.size() != partition.intervals())
    throw input_error("regime model: need one matrix per partition interval");
  const std::size_t n = num_states();
  for (const auto& p : matrices.matrices)
    if (p.rows() != n || p.cols() != n || !p.is_stochastic(1e-6))
      throw input_error("regime model: matrices must be stochastic over the state grid");
}

CountTensor count_transitions(const DiscreteReturnSeries& J, const IndexSeries& V,
                              const Partition& partition) {
  partition.validate();
  const std::size_t m = static_cast<std::size_t>(V.memory);
  if (m < 1 || V.first != m - 1 || J.size() < m || V.size() != J.size() - m + 1)
    throw input_error("count_transitions: index series not aligned with the state series");

  CountTensor out;
  out.num_states = static_cast<std::size_t>(J.map.num_states());
  out.per_interval.assign(partition.intervals(), Counts(out.num_states, out.num_states));

  for (std::size_t n = m; n < J.size(); ++n) {
    const std::size_t r = partition.interval_of(V.at(n - 1));
    out.per_interval[r](J.map.index_of(J.states[n - 1]), J.map.index_of(J.states[n])) += 1;
  }
  return out;
}

TransitionMatrixSet estimate_matrices(const CountTensor& counts) {
  TransitionMatrixSet out;
  const std::size_t n = counts.num_states;
  out.matrices.reserve(counts.per_interval.size());
  out.row_exposure.reserve(counts.per_interval.size());
  for (const auto& c : counts.per_interval) {
    Matrix p(n, n);
    std::vector<std::int64_t> exposure(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t rs = c.row_sum(i);
      exposure[i] = rs;
      if (rs > 0) {
        for (std::size_t j = 0; j < n; ++j)
          p(i, j) = static_cast<double>(c(i, j)) / static_cast<double>(rs);
      } else {
        for (std::size_t j = 0; j < n; ++j) p(i, j) = 1.0 / static_cast<double>(n);
      }
    }
    out.matrices.push_back(std::move(p));
    out.row_exposure.push_back(std::move(exposure));
  }
  return out;
}

double log_likelihood(const Counts& counts) {
  double ll = 0.0;
  for (std::size_t i = 0; i < counts.rows(); ++i) {
    const std::int64_t rs = counts.row_sum(i);
    if (rs == 0) continue;
    const double log_rs = std::log(static_cast<double>(rs));
    for (std::size_t j = 0; j < counts.cols(); ++j) {
      const std::int64_t nij = counts(i, j);
      if (nij > 0) ll += static_cast<double>(nij) * (std::log(static_cast<double>(nij)) - log_rs);
    }
  }
  return ll;
}

double log_likelihood(const CountTensor& counts) {
  double ll = 0.0;
  for (const auto& c : counts.per_interval) ll += log_likelihood(c);
  return ll;
}

RegimeModel fit_regime_model(const DiscreteReturnSeries& J, const IndexSeries& V,
                             const Partition& partition) {
  RegimeModel model;
  model.spec = {J.map, V.memory, V.f, V.units};
  model.partition = partition;
  model.matrices = estimate_matrices(count_transitions(J, V, partition));
  return model;
}

}  // namespace imc
