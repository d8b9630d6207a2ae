#pragma once

#include <map>
#include <string>
#include <vector>

#include "imc/estimation.hpp"

namespace imc {

// JSON document with map, memory, index function tag, units, thresholds,
// row-major matrices and per-row exposure counts. `meta` entries, when given,
// are stored under a "meta" object and round-trip untouched.
std::string model_to_json(const RegimeModel& model,
                          const std::map<std::string, std::string>& meta = {});
RegimeModel model_from_json(const std::string& text);

void save_model(const RegimeModel& model, const std::string& path,
                const std::map<std::string, std::string>& meta = {});
RegimeModel load_model(const std::string& path);

// Matrices from a JSON file: a bare 2-D array, an object with a "matrix"
// entry, or a full model document (all regime matrices, in order).
std::vector<Matrix> load_matrices(const std::string& path);

// State series as CSV (`n,state`), comment lines prefixed with '#'.
void save_state_series(const DiscreteReturnSeries& J, const std::string& path,
                       const std::map<std::string, std::string>& meta = {});
std::vector<int> load_state_series(const std::string& path);

// Map sidecar for discretized series.
std::string map_to_json(const DiscretizationMap& map,
                        const std::map<std::string, std::string>& meta = {});
DiscretizationMap map_from_json(const std::string& text);
void save_map(const DiscretizationMap& map, const std::string& path,
              const std::map<std::string, std::string>& meta = {});
DiscretizationMap load_map(const std::string& path);

}  // namespace imc
