#pragma once

#include <cstdint>
#include <vector>

#include "imc/estimation.hpp"

namespace imc {

struct GridOptions {
  enum class Mode { quantile, uniform };
  Mode mode = Mode::quantile;
  // Minimum number of transitions required on each side of a candidate;
  // candidates that cannot meet it are dropped.
  std::int64_t min_exposure = 100;
};

struct CandidateGrid {
  std::vector<double> points;  // strictly increasing
  std::size_t dropped = 0;     // removed by the exposure rule

  std::size_t size() const { return points.size(); }
};

// Candidate thresholds on the observed index range. Only index values that
// act as transition sources (every V_t except the last) participate in the
// placement and the exposure rule.
CandidateGrid candidate_grid(const IndexSeries& V, std::size_t n, GridOptions opts = {});

// Transition counts per grid cell (cell c holds sources with
// grid[c-1] < V <= grid[c]), stored as prefix sums so any contiguous cell
// range resolves to a count matrix, or directly to its MLE log-likelihood,
// in O(|E|^2).
class BinnedCounts {
 public:
  BinnedCounts(const DiscreteReturnSeries& J, const IndexSeries& V, const CandidateGrid& grid);

  std::size_t cells() const { return num_cells_; }
  std::size_t num_states() const { return num_states_; }
  const CandidateGrid& grid() const { return grid_; }

  // Cells first..last inclusive.
  Counts interval(std::size_t first, std::size_t last) const;
  double interval_loglik(std::size_t first, std::size_t last) const;
  std::int64_t interval_transitions(std::size_t first, std::size_t last) const;
  Counts total() const { return interval(0, num_cells_ - 1); }

  // Count tensor for thresholds at the given grid indices (ascending).
  CountTensor tensor(const std::vector<std::size_t>& boundaries) const;

 private:
  CandidateGrid grid_;
  std::size_t num_states_ = 0;
  std::size_t num_cells_ = 0;
  std::vector<Counts> cum_;         // cum_[c] = cells 0..c summed
  std::vector<std::int64_t> cum_n_; // transition totals, same prefix structure
};

enum class SearchStrategy { exhaustive, dp };
enum class Criterion { aic, bic };

struct CriterionValues {
  double aic = 0.0;
  double bic = 0.0;
};

struct SelectionTraceRow {
  int k = 0;
  double log_lik = 0.0;
  double distance = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  // Percent change against the previous row; NaN on the first row.
  double pct_delta_distance = 0.0;
  double pct_delta_aic = 0.0;
  double pct_delta_bic = 0.0;
};

struct ChangePointFit {
  int k = 0;
  std::vector<double> thresholds;
  RegimeModel model;
  double log_lik = 0.0;
  double null_log_lik = 0.0;
  double distance = 0.0;  // D = 2*(log_lik - null_log_lik)
  double aic = 0.0;
  double bic = 0.0;
  CandidateGrid grid;
  std::vector<SelectionTraceRow> trace;  // filled by select_k
};

// Best threshold positions (grid indices) for exactly k thresholds.
// Exhaustive enumeration and the segmented dynamic program agree bit-exactly,
// including the tie-break towards the lexicographically smallest vector.
struct SearchResult {
  std::vector<std::size_t> boundaries;
  double log_lik = 0.0;
};
SearchResult search_binned(const BinnedCounts& bins, std::size_t k, SearchStrategy strategy);

ChangePointFit search_single(const DiscreteReturnSeries& J, const IndexSeries& V,
                             const CandidateGrid& grid);
ChangePointFit search_multi(const DiscreteReturnSeries& J, const IndexSeries& V,
                            const CandidateGrid& grid, std::size_t k,
                            SearchStrategy strategy = SearchStrategy::dp);

// D = 2*(fit - null), clamped at zero.
double distance_statistic(double fit_log_lik, double null_log_lik);

// AIC(k) = 2*|E|*(|E|-1)*(k+1) - 2*logL
// BIC(k) = 2*ln(n_grid)*|E|*(|E|-1)*(k+1) - 2*logL
CriterionValues information_criteria(double log_lik, std::size_t k, std::size_t e_size,
                                     std::size_t n_grid);

// Fits k = 0,1,... and stops once the criterion's relative change drops below
// improvement_floor; returns the criterion-minimizing fit among those
// computed, with the full trace attached.
ChangePointFit select_k(const DiscreteReturnSeries& J, const IndexSeries& V,
                        const CandidateGrid& grid, std::size_t k_max,
                        Criterion criterion = Criterion::bic, double improvement_floor = 0.001);

}  // namespace imc
