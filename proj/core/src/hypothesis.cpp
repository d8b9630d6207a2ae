#include "imc/hypothesis.hpp"

#include <algorithm>
#include <cmath>

#include "imc/errors.hpp"
#include "imc/parallel.hpp"
#include "imc/rng.hpp"

namespace imc {

NullDistribution bootstrap_null(const Matrix& p_null, const IndexSpec& spec, std::size_t length,
                                std::size_t replicates, const CandidateGrid& grid,
                                std::uint64_t seed, const BootstrapOptions& opts) {
  spec.map.validate();
  if (!p_null.is_stochastic(1e-9) ||
      p_null.rows() != static_cast<std::size_t>(spec.map.num_states()))
    throw input_error("bootstrap: null matrix is not stochastic over the state grid");
  if (replicates < 1) throw input_error("bootstrap: need at least one replicate");
  if (length < static_cast<std::size_t>(spec.memory) + 2)
    throw input_error("bootstrap: trajectory length must be at least m + 2");
  if (!opts.research) {
    Partition check{opts.fixed_thresholds};
    check.validate();
    if (check.thresholds.size() != opts.k)
      throw input_error("bootstrap: fixed thresholds must match k");
  }

  NullDistribution out;
  out.samples.assign(replicates, 0.0);
  out.seed = seed;
  out.k = opts.k;
  out.trajectory_length = length;
  out.researched = opts.research;

  parallel_for(replicates, opts.threads, [&](std::size_t b) {
    auto rng = make_stream(seed, b + 1);
    const DiscreteReturnSeries J =
        simulate_markov(p_null, spec.map, length, rng, opts.initial_distribution);
    const IndexSeries V = compute_index(J, spec);
    if (opts.research) {
      const BinnedCounts bins(J, V, grid);
      const SearchResult found = search_binned(bins, opts.k, SearchStrategy::dp);
      out.samples[b] =
          distance_statistic(found.log_lik, bins.interval_loglik(0, bins.cells() - 1));
    } else {
      const Partition fixed{opts.fixed_thresholds};
      const CountTensor split = count_transitions(J, V, fixed);
      const CountTensor whole = count_transitions(J, V, Partition{});
      out.samples[b] = distance_statistic(log_likelihood(split), log_likelihood(whole));
    }
  });
  return out;
}

double critical_value(const NullDistribution& dist, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("critical value: alpha must lie in (0, 1)");
  std::vector<double> sorted = dist.samples;
  std::sort(sorted.begin(), sorted.end());
  const double target = (1.0 - alpha) * static_cast<double>(sorted.size());
  std::size_t rank =
      static_cast<std::size_t>(std::ceil(target - 1e-9 * std::max(1.0, target)));
  if (rank < 1) rank = 1;
  if (rank > sorted.size()) rank = sorted.size();
  return sorted[rank - 1];
}

double p_value(const NullDistribution& dist, double d_hat) {
  std::size_t exceed = 0;
  for (double d : dist.samples)
    if (d >= d_hat) ++exceed;
  return static_cast<double>(1 + exceed) / static_cast<double>(dist.samples.size() + 1);
}

int chi_square_df(std::size_t e_size) {
  if (e_size < 2) throw std::invalid_argument("chi-square reference needs at least 2 states");
  return static_cast<int>(e_size * (e_size - 1));
}

TestResult hypothesis_test(const NullDistribution& dist, double d_hat,
                           std::span<const double> alphas) {
  TestResult out;
  out.d_hat = d_hat;
  out.p = p_value(dist, d_hat);
  out.replicates = dist.samples.size();
  for (double a : alphas) {
    const double d_alpha = critical_value(dist, a);
    out.critical_values.emplace_back(a, d_alpha);
    out.reject.emplace_back(a, d_hat >= d_alpha);
  }
  return out;
}

}  // namespace imc
