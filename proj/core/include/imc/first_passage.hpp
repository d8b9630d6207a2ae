#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "imc/estimation.hpp"

namespace imc {

// The last m observed states, oldest first.
struct WindowState {
  std::vector<int> states;

  std::size_t memory() const { return states.size(); }
};

// Index interval targeted by a first-passage question. Regime targets are
// right-closed, (lo, hi]; explicit intervals may close either end.
struct TargetInterval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool include_lo = false;
  bool include_hi = true;

  bool contains(double v) const {
    const bool above = include_lo ? v >= lo : v > lo;
    const bool below = include_hi ? v <= hi : v < hi;
    return above && below;
  }

  // Interval I_a of the model partition, 0-based regime index.
  static TargetInterval regime(const RegimeModel& model, std::size_t regime_index);
};

// g(n) = P(index first enters the target exactly n steps ahead), n = 1..horizon.
struct FirstPassageDistribution {
  TargetInterval target;
  std::size_t horizon = 0;
  std::vector<double> g;          // g[n-1] is the step-n probability
  std::vector<double> std_error;  // per-step binomial standard errors; empty for exact
  double tail_mass = 0.0;         // 1 - sum(g): no entrance within the horizon
  std::string method;             // "exact" or "monte-carlo"
};

// Next-step states that push the updated index into the target.
std::vector<int> reachable_set(const WindowState& window, const RegimeModel& model,
                               const TargetInterval& target);

// Dynamic program over all |E|^m window states; exact. Guarded at 10^6 window
// states; beyond that callers should switch to first_passage_mc.
FirstPassageDistribution first_passage_exact(const RegimeModel& model, const WindowState& window,
                                             const TargetInterval& target, std::size_t horizon);

FirstPassageDistribution first_passage_mc(const RegimeModel& model, const WindowState& window,
                                          const TargetInterval& target, std::size_t horizon,
                                          std::size_t replicates, std::uint64_t seed,
                                          int threads = 0);

}  // namespace imc
