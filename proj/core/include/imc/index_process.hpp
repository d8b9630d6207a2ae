#pragma once

#include <string>
#include <vector>

#include "imc/market_data.hpp"

namespace imc {

enum class IndexKind { square, absolute, identity, table };

// Units of the index values. `normalized` divides f(i*delta) by the natural
// power of delta (delta^2 for square, delta for absolute/identity), so the
// index and any thresholds on it do not depend on the grid amplitude.
// User tables are reported as-is in both conventions.
enum class IndexUnits { normalized, raw };

struct IndexFunction {
  IndexKind kind = IndexKind::square;
  std::vector<double> table;  // one value per state index when kind == table

  double value(int state, const DiscretizationMap& map, IndexUnits units) const;

  static IndexFunction parse(const std::string& tag);  // "square", "abs", "identity"
  std::string tag() const;
};

struct IndexBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// V_t = (1/m) * sum_{k=0}^{m-1} f(J_{t-k}), defined for t >= m-1.
struct IndexSeries {
  int memory = 0;
  IndexFunction f;
  IndexUnits units = IndexUnits::normalized;
  std::size_t first = 0;        // = memory - 1
  std::vector<double> values;   // values[t - first] is V_t

  double at(std::size_t t) const { return values[t - first]; }
  std::size_t size() const { return values.size(); }
};

// Everything needed to rebuild an index series from a state series.
struct IndexSpec {
  DiscretizationMap map;
  int memory = 30;
  IndexFunction f;
  IndexUnits units = IndexUnits::normalized;
};

IndexSeries compute_index(const DiscreteReturnSeries& J, int memory, const IndexFunction& f,
                          IndexUnits units = IndexUnits::normalized);
IndexSeries compute_index(const DiscreteReturnSeries& J, const IndexSpec& spec);

// Extremes of f over the state grid; every index value lies in [lower, upper].
IndexBounds index_bounds(const DiscretizationMap& map, const IndexFunction& f,
                         IndexUnits units = IndexUnits::normalized);

// f evaluated at every state, indexed by DiscretizationMap::index_of.
std::vector<double> state_values(const DiscretizationMap& map, const IndexFunction& f,
                                 IndexUnits units);

}  // namespace imc
