#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "imc/changepoint.hpp"
#include "imc/simulate.hpp"

namespace imc {

// Bootstrap approximation of the distance statistic's null distribution.
struct NullDistribution {
  std::vector<double> samples;  // one D per replicate, replicate order
  std::uint64_t seed = 0;
  std::size_t k = 1;
  std::size_t trajectory_length = 0;
  bool researched = true;  // thresholds re-estimated per replicate
};

struct BootstrapOptions {
  std::size_t k = 1;
  // Default: re-run the threshold search on every replicate, as required for
  // the null distribution of a maximized statistic. With research = false the
  // statistic is evaluated at fixed_thresholds instead.
  bool research = true;
  std::vector<double> fixed_thresholds;
  // Initial state distribution of each simulated trajectory (empirical
  // distribution of the data); uniform when empty.
  std::vector<double> initial_distribution;
  int threads = 0;
};

// Simulates `replicates` plain Markov trajectories of the given length from
// p_null, rebuilds the index per the spec and evaluates the distance
// statistic on the same candidate grid. Deterministic for a given seed;
// replicates run on independent RNG streams so threading cannot change results.
NullDistribution bootstrap_null(const Matrix& p_null, const IndexSpec& spec, std::size_t length,
                                std::size_t replicates, const CandidateGrid& grid,
                                std::uint64_t seed, const BootstrapOptions& opts = {});

// Empirical (1 - alpha) quantile, nearest-rank rule.
double critical_value(const NullDistribution& dist, double alpha);

// p = (1 + #{D_b >= d_hat}) / (B + 1); never below 1/(B+1).
double p_value(const NullDistribution& dist, double d_hat);

// Degrees of freedom of the fixed-threshold asymptotic reference: |E|*(|E|-1).
int chi_square_df(std::size_t e_size);

struct TestResult {
  double d_hat = 0.0;
  double p = 0.0;
  std::vector<std::pair<double, double>> critical_values;  // (alpha, d_alpha)
  std::vector<std::pair<double, bool>> reject;             // (alpha, d_hat >= d_alpha)
  std::size_t replicates = 0;
};

TestResult hypothesis_test(const NullDistribution& dist, double d_hat,
                           std::span<const double> alphas);

}  // namespace imc
