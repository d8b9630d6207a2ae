#include "imc/index_process.hpp"

#include <algorithm>
#include <cmath>

#include "imc/errors.hpp"

namespace imc {

double IndexFunction::value(int state, const DiscretizationMap& map, IndexUnits units) const {
  switch (kind) {
    case IndexKind::square: {
      const double x = units == IndexUnits::raw ? map.value_of(state) : static_cast<double>(state);
      return x * x;
    }
    case IndexKind::absolute:
      return units == IndexUnits::raw ? std::abs(map.value_of(state))
                                      : std::abs(static_cast<double>(state));
    case IndexKind::identity:
      return units == IndexUnits::raw ? map.value_of(state) : static_cast<double>(state);
    case IndexKind::table: {
      const std::size_t idx = map.index_of(state);
      if (idx >= table.size()) throw input_error("index table does not cover the state grid");
      return table[idx];
    }
  }
  throw input_error("unknown index function");
}

IndexFunction IndexFunction::parse(const std::string& tag) {
  IndexFunction f;
  if (tag == "square") f.kind = IndexKind::square;
  else if (tag == "abs" || tag == "absolute") f.kind = IndexKind::absolute;
  else if (tag == "identity") f.kind = IndexKind::identity;
  else throw input_error("unknown index function tag: " + tag);
  return f;
}

std::string IndexFunction::tag() const {
  switch (kind) {
    case IndexKind::square: return "square";
    case IndexKind::absolute: return "abs";
    case IndexKind::identity: return "identity";
    case IndexKind::table: return "table";
  }
  return "?";
}

std::vector<double> state_values(const DiscretizationMap& map, const IndexFunction& f,
                                 IndexUnits units) {
  std::vector<double> out(static_cast<std::size_t>(map.num_states()));
  for (std::size_t idx = 0; idx < out.size(); ++idx)
    out[idx] = f.value(map.state_at(idx), map, units);
  return out;
}

IndexSeries compute_index(const DiscreteReturnSeries& J, int memory, const IndexFunction& f,
                          IndexUnits units) {
  if (memory < 1) throw input_error("index memory must be positive");
  if (J.size() < static_cast<std::size_t>(memory))
    throw input_error("series shorter than the index memory");
  J.map.validate();

  const std::vector<double> fv = state_values(J.map, f, units);
  const double m = static_cast<double>(memory);

  IndexSeries out;
  out.memory = memory;
  out.f = f;
  out.units = units;
  out.first = static_cast<std::size_t>(memory - 1);
  out.values.reserve(J.size() - out.first);

  double sum = 0.0;
  for (std::size_t t = 0; t < out.first; ++t) sum += fv[J.map.index_of(J.states[t])];

  // Sliding update; the window is re-summed periodically so floating-point
  // drift stays below 1e-12 even over millions of steps.
  constexpr std::size_t refresh_every = 1024;
  for (std::size_t t = out.first; t < J.size(); ++t) {
    sum += fv[J.map.index_of(J.states[t])];
    if ((t - out.first) % refresh_every == refresh_every - 1) {
      double s = 0.0;
      for (std::size_t u = t + 1 - static_cast<std::size_t>(memory); u <= t; ++u)
        s += fv[J.map.index_of(J.states[u])];
      sum = s;
    }
    out.values.push_back(sum / m);
    sum -= fv[J.map.index_of(J.states[t + 1 - static_cast<std::size_t>(memory)])];
  }
  return out;
}

IndexSeries compute_index(const DiscreteReturnSeries& J, const IndexSpec& spec) {
  return compute_index(J, spec.memory, spec.f, spec.units);
}

IndexBounds index_bounds(const DiscretizationMap& map, const IndexFunction& f, IndexUnits units) {
  map.validate();
  const std::vector<double> fv = state_values(map, f, units);
  const auto [lo, hi] = std::minmax_element(fv.begin(), fv.end());
  return {*lo, *hi};
}

}  // namespace imc
