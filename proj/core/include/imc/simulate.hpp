#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "imc/estimation.hpp"

namespace imc {

struct SimulationConfig {
  std::size_t length = 0;          // total states emitted, must exceed the memory
  std::uint64_t seed = 0;
  std::vector<int> initial_window; // exactly m states; all-zero window when empty
};

// Index-dependent chain: at each step the index over the trailing m states
// selects the regime matrix, and the next state is drawn from the row of the
// current state. The emitted series starts with the initial window.
DiscreteReturnSeries simulate_imc(const RegimeModel& model, const SimulationConfig& cfg);

// Plain Markov chain. The initial state is drawn from initial_distribution,
// or uniformly when none is given.
DiscreteReturnSeries simulate_markov(const Matrix& p, const DiscretizationMap& map,
                                     std::size_t length, std::mt19937_64& rng,
                                     std::span<const double> initial_distribution = {});
DiscreteReturnSeries simulate_markov(const Matrix& p, const DiscretizationMap& map,
                                     std::size_t length, std::uint64_t seed,
                                     std::span<const double> initial_distribution = {});

// State occupancy frequencies of a series, indexed by DiscretizationMap::index_of.
std::vector<double> state_frequencies(const DiscreteReturnSeries& J);

}  // namespace imc
