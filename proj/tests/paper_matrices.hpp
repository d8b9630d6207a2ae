#pragma once

// Published five-state transition matrices of the ENI intra-day study, used
// as reference fixtures: the high/low-volatility pair of the single-threshold
// model and the five regime matrices of the four-threshold model, with their
// pairwise %RSMD / %MAD tables.

#include <array>

#include "imc/estimation.hpp"
#include "test_helpers.hpp"

namespace imc::test {

inline Matrix paper_p_high() {
  return matrix_from_rows({{0.173, 0.151, 0.207, 0.218, 0.251},
                           {0.129, 0.196, 0.267, 0.255, 0.153},
                           {0.137, 0.209, 0.300, 0.221, 0.133},
                           {0.150, 0.246, 0.275, 0.204, 0.125},
                           {0.237, 0.215, 0.218, 0.159, 0.171}});
}

inline Matrix paper_p_low() {
  return matrix_from_rows({{0.067, 0.162, 0.312, 0.338, 0.121},
                           {0.031, 0.183, 0.391, 0.347, 0.048},
                           {0.033, 0.236, 0.466, 0.234, 0.031},
                           {0.049, 0.339, 0.397, 0.185, 0.030},
                           {0.110, 0.338, 0.316, 0.170, 0.066}});
}

inline std::array<Matrix, 5> paper_regime_matrices() {
  return {matrix_from_rows({{0.046, 0.143, 0.351, 0.378, 0.082},
                            {0.014, 0.141, 0.445, 0.374, 0.026},
                            {0.016, 0.219, 0.532, 0.217, 0.016},
                            {0.027, 0.365, 0.448, 0.146, 0.014},
                            {0.084, 0.360, 0.358, 0.147, 0.051}}),
          matrix_from_rows({{0.064, 0.162, 0.314, 0.344, 0.116},
                            {0.033, 0.202, 0.375, 0.340, 0.050},
                            {0.039, 0.249, 0.429, 0.248, 0.035},
                            {0.053, 0.333, 0.382, 0.199, 0.033},
                            {0.107, 0.343, 0.321, 0.169, 0.060}}),
          matrix_from_rows({{0.091, 0.171, 0.279, 0.304, 0.154},
                            {0.067, 0.215, 0.321, 0.308, 0.089},
                            {0.073, 0.248, 0.367, 0.245, 0.067},
                            {0.086, 0.300, 0.332, 0.222, 0.060},
                            {0.135, 0.312, 0.283, 0.182, 0.088}}),
          matrix_from_rows({{0.150, 0.166, 0.224, 0.238, 0.222},
                            {0.127, 0.199, 0.269, 0.256, 0.149},
                            {0.138, 0.208, 0.298, 0.222, 0.134},
                            {0.150, 0.245, 0.276, 0.206, 0.123},
                            {0.206, 0.236, 0.245, 0.172, 0.141}}),
          matrix_from_rows({{0.239, 0.121, 0.153, 0.155, 0.332},
                            {0.232, 0.151, 0.182, 0.169, 0.266},
                            {0.241, 0.142, 0.207, 0.168, 0.242},
                            {0.249, 0.168, 0.182, 0.161, 0.240},
                            {0.320, 0.150, 0.155, 0.130, 0.245}})};
}

// Published pairwise distance tables for the five regime matrices, percent.
inline std::array<std::array<double, 5>, 5> paper_rsmd_table() {
  return {{{0.0, 20.1, 35.8, 59.4, 100.5},
           {20.1, 0.0, 16.8, 43.0, 86.1},
           {35.8, 16.8, 0.0, 27.1, 70.9},
           {59.4, 43.0, 27.1, 0.0, 44.1},
           {100.5, 86.1, 70.9, 44.1, 0.0}}};
}

inline std::array<std::array<double, 5>, 5> paper_mad_table() {
  return {{{0.0, 17.2, 32.2, 53.4, 90.1},
           {17.2, 0.0, 15.2, 38.6, 80.6},
           {32.2, 15.2, 0.0, 25.2, 67.7},
           {53.4, 38.6, 25.2, 0.0, 42.6},
           {90.1, 80.6, 67.7, 42.6, 0.0}}};
}

// Published single-pair distances: rsmd(high, low) and mad(high, low).
inline constexpr double paper_pair_rsmd = 49.3;
inline constexpr double paper_pair_mad = 44.2;

inline std::vector<double> paper_thresholds() { return {0.70, 1.00, 1.40, 2.10}; }

// Five-regime model assembled from the published matrices, normalized index
// units so the thresholds apply for any grid amplitude.
inline RegimeModel paper_regime_model(int memory = 30, double delta = 0.0025) {
  RegimeModel model;
  model.spec.map = {delta, 2, 2};
  model.spec.memory = memory;
  model.spec.f.kind = IndexKind::square;
  model.spec.units = IndexUnits::normalized;
  model.partition.thresholds = paper_thresholds();
  for (const auto& p : paper_regime_matrices())
    model.matrices.matrices.push_back(normalized_rows(p));
  model.matrices.row_exposure.assign(5, std::vector<std::int64_t>(5, 0));
  return model;
}

}  // namespace imc::test
