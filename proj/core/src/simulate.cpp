#include "imc/simulate.hpp"

#include "imc/errors.hpp"
#include "imc/rng.hpp"

namespace imc {

DiscreteReturnSeries simulate_imc(const RegimeModel& model, const SimulationConfig& cfg) {
  model.validate();
  const std::size_t m = static_cast<std::size_t>(model.spec.memory);
  if (cfg.length <= m) throw input_error("simulation length must exceed the index memory");

  std::vector<int> window = cfg.initial_window;
  if (window.empty()) window.assign(m, 0);
  if (window.size() != m) throw input_error("initial window must hold exactly m states");
  for (int s : window)
    if (s < -model.spec.map.z_min || s > model.spec.map.z_max)
      throw input_error("initial window state outside the grid");

  const std::vector<double> fv = state_values(model.spec.map, model.spec.f, model.spec.units);
  auto rng = make_stream(cfg.seed, 0);

  DiscreteReturnSeries out;
  out.map = model.spec.map;
  out.states = window;
  out.states.reserve(cfg.length);

  double sum = 0.0;
  for (int s : window) sum += fv[model.spec.map.index_of(s)];

  constexpr std::size_t refresh_every = 1024;
  for (std::size_t n = m; n < cfg.length; ++n) {
    if (n % refresh_every == 0) {
      double s = 0.0;
      for (std::size_t t = n - m; t < n; ++t) s += fv[model.spec.map.index_of(out.states[t])];
      sum = s;
    }
    const double v = sum / static_cast<double>(m);
    const std::size_t regime = model.partition.interval_of(v);
    const std::size_t cur = model.spec.map.index_of(out.states[n - 1]);
    const std::size_t next = sample_index(rng, model.matrices.matrices[regime].row(cur));
    out.states.push_back(model.spec.map.state_at(next));
    sum += fv[next] - fv[model.spec.map.index_of(out.states[n - m])];
  }
  return out;
}

DiscreteReturnSeries simulate_markov(const Matrix& p, const DiscretizationMap& map,
                                     std::size_t length, std::mt19937_64& rng,
                                     std::span<const double> initial_distribution) {
  map.validate();
  const std::size_t n = static_cast<std::size_t>(map.num_states());
  if (!p.is_stochastic(1e-9) || p.rows() != n)
    throw input_error("simulate_markov: matrix is not stochastic over the state grid");
  if (length < 1) throw input_error("simulate_markov: length must be positive");
  if (!initial_distribution.empty() && initial_distribution.size() != n)
    throw input_error("simulate_markov: initial distribution size mismatch");

  DiscreteReturnSeries out;
  out.map = map;
  out.states.reserve(length);

  std::size_t cur;
  if (initial_distribution.empty()) {
    cur = static_cast<std::size_t>(next_double(rng) * static_cast<double>(n));
    if (cur >= n) cur = n - 1;
  } else {
    cur = sample_index(rng, initial_distribution);
  }
  out.states.push_back(map.state_at(cur));
  for (std::size_t t = 1; t < length; ++t) {
    cur = sample_index(rng, p.row(cur));
    out.states.push_back(map.state_at(cur));
  }
  return out;
}

DiscreteReturnSeries simulate_markov(const Matrix& p, const DiscretizationMap& map,
                                     std::size_t length, std::uint64_t seed,
                                     std::span<const double> initial_distribution) {
  auto rng = make_stream(seed, 0);
  return simulate_markov(p, map, length, rng, initial_distribution);
}

std::vector<double> state_frequencies(const DiscreteReturnSeries& J) {
  std::vector<double> freq(static_cast<std::size_t>(J.map.num_states()), 0.0);
  if (J.states.empty()) return freq;
  for (int s : J.states) freq[J.map.index_of(s)] += 1.0;
  for (double& f : freq) f /= static_cast<double>(J.states.size());
  return freq;
}

}  // namespace imc
