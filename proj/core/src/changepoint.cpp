#include "imc/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "imc/errors.hpp"

namespace imc {

namespace {

// Index values at transition-source times: every V_t except the last.
std::vector<double> source_values(const IndexSeries& V) {
  if (V.size() < 2) throw input_error("index series too short to contain transitions");
  return {V.values.begin(), V.values.end() - 1};
}

}  // namespace

CandidateGrid candidate_grid(const IndexSeries& V, std::size_t n, GridOptions opts) {
  if (n < 1) throw input_error("candidate grid size must be at least 1");

  std::vector<double> sources = source_values(V);
  std::vector<double> sorted = sources;
  std::sort(sorted.begin(), sorted.end());

  std::size_t distinct = sorted.empty() ? 0 : 1;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] != sorted[i - 1]) ++distinct;
  if (distinct < 2) throw input_error("candidate grid: no distinct candidates (index is constant)");
  if (n > distinct)
    throw input_error("candidate grid: requested " + std::to_string(n) +
                      " candidates but the index has only " + std::to_string(distinct) +
                      " distinct values");

  std::vector<double> points;
  points.reserve(n);
  if (opts.mode == GridOptions::Mode::uniform) {
    const double lo = sorted.front(), hi = sorted.back();
    for (std::size_t j = 1; j <= n; ++j)
      points.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n + 1));
  } else {
    // Nearest-rank empirical quantiles at j/(n+1).
    const std::size_t s = sorted.size();
    for (std::size_t j = 1; j <= n; ++j) {
      const double q = static_cast<double>(j) / static_cast<double>(n + 1);
      std::size_t rank = static_cast<std::size_t>(
          std::ceil(q * static_cast<double>(s) - 1e-9 * static_cast<double>(s)));
      if (rank < 1) rank = 1;
      if (rank > s) rank = s;
      points.push_back(sorted[rank - 1]);
    }
  }
  points.erase(std::unique(points.begin(), points.end()), points.end());

  CandidateGrid out;
  out.points.reserve(points.size());
  for (double psi : points) {
    const std::size_t below = static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), psi) - sorted.begin());
    const std::int64_t low = static_cast<std::int64_t>(below);
    const std::int64_t high = static_cast<std::int64_t>(sorted.size()) - low;
    if (low >= opts.min_exposure && high >= opts.min_exposure)
      out.points.push_back(psi);
    else
      ++out.dropped;
  }
  return out;
}

BinnedCounts::BinnedCounts(const DiscreteReturnSeries& J, const IndexSeries& V,
                           const CandidateGrid& grid)
    : grid_(grid) {
  const std::size_t m = static_cast<std::size_t>(V.memory);
  if (m < 1 || V.first != m - 1 || J.size() < m + 1 || V.size() != J.size() - m + 1)
    throw input_error("binned counts: index series not aligned with the state series");
  for (std::size_t i = 1; i < grid_.points.size(); ++i)
    if (!(grid_.points[i - 1] < grid_.points[i]))
      throw input_error("binned counts: grid points must be strictly increasing");

  num_states_ = static_cast<std::size_t>(J.map.num_states());
  num_cells_ = grid_.points.size() + 1;

  std::vector<Counts> cells(num_cells_, Counts(num_states_, num_states_));
  for (std::size_t n = m; n < J.size(); ++n) {
    const double v = V.at(n - 1);
    const std::size_t c = static_cast<std::size_t>(
        std::lower_bound(grid_.points.begin(), grid_.points.end(), v) - grid_.points.begin());
    cells[c](J.map.index_of(J.states[n - 1]), J.map.index_of(J.states[n])) += 1;
  }

  cum_.reserve(num_cells_);
  cum_n_.reserve(num_cells_);
  Counts acc(num_states_, num_states_);
  std::int64_t total = 0;
  for (std::size_t c = 0; c < num_cells_; ++c) {
    acc.add(cells[c]);
    total += cells[c].total();
    cum_.push_back(acc);
    cum_n_.push_back(total);
  }
}

Counts BinnedCounts::interval(std::size_t first, std::size_t last) const {
  Counts out = cum_[last];
  if (first > 0) out.subtract(cum_[first - 1]);
  return out;
}

double BinnedCounts::interval_loglik(std::size_t first, std::size_t last) const {
  const Counts& hi = cum_[last];
  const Counts* lo = first > 0 ? &cum_[first - 1] : nullptr;
  double ll = 0.0;
  for (std::size_t i = 0; i < num_states_; ++i) {
    std::int64_t row = 0;
    double row_ll = 0.0;
    for (std::size_t j = 0; j < num_states_; ++j) {
      const std::int64_t nij = hi(i, j) - (lo ? (*lo)(i, j) : 0);
      if (nij > 0) {
        row += nij;
        row_ll += static_cast<double>(nij) * std::log(static_cast<double>(nij));
      }
    }
    if (row > 0) ll += row_ll - static_cast<double>(row) * std::log(static_cast<double>(row));
  }
  return ll;
}

std::int64_t BinnedCounts::interval_transitions(std::size_t first, std::size_t last) const {
  return cum_n_[last] - (first > 0 ? cum_n_[first - 1] : 0);
}

CountTensor BinnedCounts::tensor(const std::vector<std::size_t>& boundaries) const {
  CountTensor out;
  out.num_states = num_states_;
  std::size_t begin = 0;
  for (std::size_t b : boundaries) {
    out.per_interval.push_back(interval(begin, b));
    begin = b + 1;
  }
  out.per_interval.push_back(interval(begin, num_cells_ - 1));
  return out;
}

namespace {

// Right-folded partition log-likelihood so the exhaustive scan and the
// dynamic program accumulate in the identical order and compare bit-exactly.
double partition_loglik(const BinnedCounts& bins, const std::vector<std::size_t>& bnd) {
  const std::size_t n_cells = bins.cells();
  std::size_t begin = bnd.empty() ? 0 : bnd.back() + 1;
  double acc = bins.interval_loglik(begin, n_cells - 1);
  for (std::size_t r = bnd.size(); r-- > 0;) {
    const std::size_t first = r > 0 ? bnd[r - 1] + 1 : 0;
    acc = bins.interval_loglik(first, bnd[r]) + acc;
  }
  return acc;
}

SearchResult search_exhaustive(const BinnedCounts& bins, std::size_t k) {
  const std::size_t n = bins.grid().size();
  // C(n, k) with overflow guard; enumeration is meant for validation sizes.
  double combos = 1.0;
  for (std::size_t i = 0; i < k; ++i)
    combos *= static_cast<double>(n - i) / static_cast<double>(i + 1);
  if (combos > 5e6)
    throw input_error("exhaustive search over " + std::to_string(n) + " choose " +
                      std::to_string(k) + " candidates is infeasible; use the dp strategy");

  std::vector<std::size_t> bnd(k);
  for (std::size_t i = 0; i < k; ++i) bnd[i] = i;

  SearchResult best;
  best.log_lik = -std::numeric_limits<double>::infinity();
  for (;;) {
    const double ll = partition_loglik(bins, bnd);
    if (ll > best.log_lik) {  // strict: first (lexicographically smallest) tie wins
      best.log_lik = ll;
      best.boundaries = bnd;
    }
    // next combination in lexicographic order
    std::size_t i = k;
    while (i > 0) {
      --i;
      if (bnd[i] != i + n - k) {
        ++bnd[i];
        for (std::size_t j = i + 1; j < k; ++j) bnd[j] = bnd[j - 1] + 1;
        i = k + 1;
        break;
      }
    }
    if (i != k + 1) break;
  }
  return best;
}

// Suffix tables S[r][c]: best log-likelihood of cells c..n_cells-1 split by r
// further thresholds. S[r][c] = max_t ll(c..t) + S[r-1][t+1].
std::vector<std::vector<double>> dp_tables(const BinnedCounts& bins, std::size_t k_max) {
  const std::size_t n_cells = bins.cells();
  std::vector<std::vector<double>> S(k_max + 1, std::vector<double>(n_cells));
  for (std::size_t c = 0; c < n_cells; ++c) S[0][c] = bins.interval_loglik(c, n_cells - 1);
  for (std::size_t r = 1; r <= k_max; ++r) {
    for (std::size_t c = 0; c + r < n_cells; ++c) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t t = c; t + r < n_cells; ++t) {
        const double v = bins.interval_loglik(c, t) + S[r - 1][t + 1];
        if (v > best) best = v;
      }
      S[r][c] = best;
    }
  }
  return S;
}

std::vector<std::size_t> dp_reconstruct(const BinnedCounts& bins,
                                        const std::vector<std::vector<double>>& S,
                                        std::size_t k) {
  const std::size_t n_cells = bins.cells();
  std::vector<std::size_t> bnd;
  bnd.reserve(k);
  std::size_t c = 0;
  for (std::size_t r = k; r >= 1; --r) {
    for (std::size_t t = c; t + r < n_cells; ++t) {
      // The max is attained by one of its own summands, so this comparison is exact.
      if (bins.interval_loglik(c, t) + S[r - 1][t + 1] == S[r][c]) {
        bnd.push_back(t);
        c = t + 1;
        break;
      }
    }
  }
  return bnd;
}

}  // namespace

SearchResult search_binned(const BinnedCounts& bins, std::size_t k, SearchStrategy strategy) {
  const std::size_t n = bins.grid().size();
  if (n == 0)
    throw convergence_error("candidate grid is empty (all candidates dropped by the exposure rule)");
  if (k > n)
    throw input_error("cannot place " + std::to_string(k) + " thresholds on a grid of " +
                      std::to_string(n) + " candidates");
  if (strategy == SearchStrategy::exhaustive) return search_exhaustive(bins, k);

  const auto S = dp_tables(bins, k);
  SearchResult out;
  out.boundaries = dp_reconstruct(bins, S, k);
  out.log_lik = S[k][0];
  return out;
}

double distance_statistic(double fit_log_lik, double null_log_lik) {
  if (!(fit_log_lik >= null_log_lik - 1e-9))
    throw std::invalid_argument("distance statistic: fitted log-likelihood below the null");
  return std::max(0.0, 2.0 * (fit_log_lik - null_log_lik));
}

CriterionValues information_criteria(double log_lik, std::size_t k, std::size_t e_size,
                                     std::size_t n_grid) {
  if (e_size < 2) throw std::invalid_argument("information criteria need at least 2 states");
  const double params = static_cast<double>(e_size) * static_cast<double>(e_size - 1) *
                        static_cast<double>(k + 1);
  CriterionValues out;
  out.aic = 2.0 * params - 2.0 * log_lik;
  out.bic = 2.0 * std::log(static_cast<double>(n_grid)) * params - 2.0 * log_lik;
  return out;
}

namespace {

ChangePointFit make_fit(const DiscreteReturnSeries& J, const IndexSeries& V,
                        const BinnedCounts& bins, const SearchResult& found) {
  ChangePointFit fit;
  fit.k = static_cast<int>(found.boundaries.size());
  fit.grid = bins.grid();
  for (std::size_t b : found.boundaries) fit.thresholds.push_back(bins.grid().points[b]);

  Partition partition{fit.thresholds};
  const CountTensor tensor = bins.tensor(found.boundaries);
  fit.model.spec = {J.map, V.memory, V.f, V.units};
  fit.model.partition = partition;
  fit.model.matrices = estimate_matrices(tensor);

  fit.log_lik = found.log_lik;
  fit.null_log_lik = bins.interval_loglik(0, bins.cells() - 1);
  fit.distance = distance_statistic(fit.log_lik, fit.null_log_lik);
  const auto crit = information_criteria(fit.log_lik, found.boundaries.size(),
                                         bins.num_states(), bins.grid().size());
  fit.aic = crit.aic;
  fit.bic = crit.bic;
  return fit;
}

}  // namespace

ChangePointFit search_single(const DiscreteReturnSeries& J, const IndexSeries& V,
                             const CandidateGrid& grid) {
  const BinnedCounts bins(J, V, grid);
  return make_fit(J, V, bins, search_binned(bins, 1, SearchStrategy::dp));
}

ChangePointFit search_multi(const DiscreteReturnSeries& J, const IndexSeries& V,
                            const CandidateGrid& grid, std::size_t k, SearchStrategy strategy) {
  const BinnedCounts bins(J, V, grid);
  return make_fit(J, V, bins, search_binned(bins, k, strategy));
}

ChangePointFit select_k(const DiscreteReturnSeries& J, const IndexSeries& V,
                        const CandidateGrid& grid, std::size_t k_max, Criterion criterion,
                        double improvement_floor) {
  if (k_max < 1) throw input_error("select_k: k_max must be at least 1");
  const BinnedCounts bins(J, V, grid);
  const std::size_t n = bins.grid().size();
  if (n == 0)
    throw convergence_error("candidate grid is empty (all candidates dropped by the exposure rule)");
  k_max = std::min(k_max, n);

  const auto S = dp_tables(bins, k_max);
  const double null_ll = S[0][0];

  std::vector<SelectionTraceRow> trace;
  for (std::size_t k = 0; k <= k_max; ++k) {
    SelectionTraceRow row;
    row.k = static_cast<int>(k);
    row.log_lik = S[k][0];
    row.distance = distance_statistic(row.log_lik, null_ll);
    const auto crit = information_criteria(row.log_lik, k, bins.num_states(), n);
    row.aic = crit.aic;
    row.bic = crit.bic;
    if (k == 0) {
      row.pct_delta_distance = row.pct_delta_aic = row.pct_delta_bic =
          std::numeric_limits<double>::quiet_NaN();
      trace.push_back(row);
      continue;
    }
    const SelectionTraceRow& prev = trace.back();
    auto pct = [](double cur, double before) {
      return before != 0.0 ? (cur - before) / std::abs(before) * 100.0
                           : std::numeric_limits<double>::quiet_NaN();
    };
    row.pct_delta_distance = pct(row.distance, prev.distance);
    row.pct_delta_aic = pct(row.aic, prev.aic);
    row.pct_delta_bic = pct(row.bic, prev.bic);
    trace.push_back(row);

    const double cur = criterion == Criterion::aic ? row.aic : row.bic;
    const double before = criterion == Criterion::aic ? prev.aic : prev.bic;
    if (before != 0.0 && std::abs(cur - before) / std::abs(before) < improvement_floor) break;
  }

  std::size_t best_k = 0;
  double best_crit = std::numeric_limits<double>::infinity();
  for (const auto& row : trace) {
    const double c = criterion == Criterion::aic ? row.aic : row.bic;
    if (c < best_crit) {
      best_crit = c;
      best_k = static_cast<std::size_t>(row.k);
    }
  }

  ChangePointFit fit = make_fit(J, V, bins, {dp_reconstruct(bins, S, best_k), S[best_k][0]});
  fit.trace = std::move(trace);
  return fit;
}

}  // namespace imc
