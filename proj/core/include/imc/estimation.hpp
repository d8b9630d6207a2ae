#pragma once

#include <cstdint>
#include <vector>

#include "imc/index_process.hpp"
#include "imc/matrix.hpp"

namespace imc {

// Thresholds psi_1 < ... < psi_k splitting the index range into k+1 regimes.
// Interval r (0-based) is (psi_r, psi_{r+1}] with the first interval reaching
// down to the index lower bound and the last up to the upper bound; all
// intervals are right-closed.
struct Partition {
  std::vector<double> thresholds;

  std::size_t intervals() const { return thresholds.size() + 1; }
  std::size_t interval_of(double v) const;  // number of thresholds strictly below v
  void validate() const;
};

// Per-regime transition counts N_{i,j;r}. A transition n-1 -> n is attributed
// to the regime containing V_{n-1}, the index at the source time.
struct CountTensor {
  std::size_t num_states = 0;
  std::vector<Counts> per_interval;

  std::int64_t total() const;
};

// Row-normalized counts. Rows with no exposure are set to uniform and are
// reported via unobserved().
struct TransitionMatrixSet {
  std::vector<Matrix> matrices;
  std::vector<std::vector<std::int64_t>> row_exposure;

  std::size_t size() const { return matrices.size(); }
  bool unobserved(std::size_t interval, std::size_t row) const {
    return row_exposure[interval][row] == 0;
  }
};

struct RegimeModel {
  IndexSpec spec;
  Partition partition;
  TransitionMatrixSet matrices;

  std::size_t num_states() const { return static_cast<std::size_t>(spec.map.num_states()); }
  IndexBounds bounds() const { return index_bounds(spec.map, spec.f, spec.units); }
  void validate() const;
};

CountTensor count_transitions(const DiscreteReturnSeries& J, const IndexSeries& V,
                              const Partition& partition);

TransitionMatrixSet estimate_matrices(const CountTensor& counts);

// L = sum_r sum_{ij} N_{i,j;r} * ln(N_{i,j;r} / N_{i;r}), with 0*ln(0) = 0.
double log_likelihood(const Counts& counts);
double log_likelihood(const CountTensor& counts);

// Counting + estimation in one step.
RegimeModel fit_regime_model(const DiscreteReturnSeries& J, const IndexSeries& V,
                             const Partition& partition);

}  // namespace imc
