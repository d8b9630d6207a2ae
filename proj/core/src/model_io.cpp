#include "imc/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "imc/errors.hpp"

namespace imc {

namespace {

using nlohmann::json;

json map_json(const DiscretizationMap& map) {
  return json{{"delta", map.delta}, {"z_min", map.z_min}, {"z_max", map.z_max}};
}

DiscretizationMap map_from(const json& j) {
  DiscretizationMap map;
  map.delta = j.at("delta").get<double>();
  map.z_min = j.at("z_min").get<int>();
  map.z_max = j.at("z_max").get<int>();
  map.validate();
  return map;
}

json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw input_error("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write file: " + path);
  out << text;
  if (!out) throw input_error("failed writing file: " + path);
}

Matrix matrix_from(const json& rows, std::size_t n) {
  // Accepts a flat row-major array or an array of rows.
  Matrix p(n, n);
  if (!rows.is_array()) throw input_error("matrix JSON must be an array");
  if (rows.size() == n && rows.front().is_array()) {
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) throw input_error("matrix JSON row size mismatch");
      for (std::size_t j = 0; j < n; ++j) p(i, j) = rows[i][j].get<double>();
    }
  } else if (rows.size() == n * n) {
    for (std::size_t t = 0; t < n * n; ++t) p.data()[t] = rows[t].get<double>();
  } else {
    throw input_error("matrix JSON has wrong number of entries");
  }
  // Printed or hand-edited matrices may carry rounding; renormalize rows that
  // are stochastic to within 5e-3 and reject anything worse. Rows already
  // exact to 1e-12 are left untouched so serialization round-trips bitwise.
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (p(i, j) < 0.0) throw input_error("matrix JSON has a negative entry");
      s += p(i, j);
    }
    if (std::abs(s - 1.0) > 5e-3)
      throw input_error("matrix JSON row " + std::to_string(i + 1) + " sums to " +
                        std::to_string(s) + ", not 1");
    if (std::abs(s - 1.0) > 1e-12)
      for (std::size_t j = 0; j < n; ++j) p(i, j) /= s;
  }
  return p;
}

}  // namespace

std::string model_to_json(const RegimeModel& model, const std::map<std::string, std::string>& meta) {
  json j;
  j["schema"] = "imc-regime-model-v1";
  j["map"] = map_json(model.spec.map);
  j["memory"] = model.spec.memory;
  if (model.spec.f.kind == IndexKind::table)
    j["index_function"] = json{{"table", model.spec.f.table}};
  else
    j["index_function"] = model.spec.f.tag();
  j["index_units"] = model.spec.units == IndexUnits::normalized ? "normalized" : "raw";
  j["thresholds"] = model.partition.thresholds;
  json mats = json::array();
  for (const auto& p : model.matrices.matrices) mats.push_back(p.data());
  j["matrices"] = std::move(mats);
  if (!model.matrices.row_exposure.empty()) j["row_exposure"] = model.matrices.row_exposure;
  if (!meta.empty()) j["meta"] = meta;
  return j.dump(2) + "\n";
}

RegimeModel model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    RegimeModel model;
    model.spec.map = map_from(j.at("map"));
    model.spec.memory = j.at("memory").get<int>();
    const auto& f = j.at("index_function");
    if (f.is_string()) {
      model.spec.f = IndexFunction::parse(f.get<std::string>());
    } else {
      model.spec.f.kind = IndexKind::table;
      model.spec.f.table = f.at("table").get<std::vector<double>>();
    }
    const std::string units = j.value("index_units", "normalized");
    if (units == "normalized") model.spec.units = IndexUnits::normalized;
    else if (units == "raw") model.spec.units = IndexUnits::raw;
    else throw input_error("model JSON: unknown index_units: " + units);

    model.partition.thresholds = j.at("thresholds").get<std::vector<double>>();
    const std::size_t n = static_cast<std::size_t>(model.spec.map.num_states());
    for (const auto& rows : j.at("matrices"))
      model.matrices.matrices.push_back(matrix_from(rows, n));
    if (j.contains("row_exposure"))
      model.matrices.row_exposure = j["row_exposure"].get<std::vector<std::vector<std::int64_t>>>();
    else
      model.matrices.row_exposure.assign(model.matrices.matrices.size(),
                                         std::vector<std::int64_t>(n, 0));
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw input_error(std::string("invalid model JSON: ") + e.what());
  }
}

void save_model(const RegimeModel& model, const std::string& path,
                const std::map<std::string, std::string>& meta) {
  write_file(path, model_to_json(model, meta));
}

RegimeModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

std::vector<Matrix> load_matrices(const std::string& path) {
  const json j = read_file(path);
  auto square_side = [&](const json& rows) -> std::size_t {
    if (!rows.is_array() || rows.empty()) throw input_error("matrix JSON must be a non-empty array");
    if (rows.front().is_array()) return rows.size();
    const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(rows.size()))));
    if (n * n != rows.size()) throw input_error("flat matrix JSON is not square");
    return n;
  };
  try {
    if (j.is_array()) return {matrix_from(j, square_side(j))};
    if (j.contains("matrix")) return {matrix_from(j["matrix"], square_side(j["matrix"]))};
    if (j.contains("matrices")) {
      const RegimeModel model = model_from_json(j.dump());
      return model.matrices.matrices;
    }
  } catch (const json::exception& e) {
    throw input_error("invalid matrix JSON in " + path + ": " + e.what());
  }
  throw input_error("no matrix found in " + path);
}

void save_state_series(const DiscreteReturnSeries& J, const std::string& path,
                       const std::map<std::string, std::string>& meta) {
  std::ostringstream out;
  for (const auto& [k, v] : meta) out << "# " << k << "=" << v << "\n";
  out << "n,state\n";
  for (std::size_t n = 0; n < J.states.size(); ++n) out << n << "," << J.states[n] << "\n";
  write_file(path, out.str());
}

std::vector<int> load_state_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open series file: " + path);
  std::vector<int> states;
  std::string line;
  bool header_done = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_done) {
      header_done = true;
      if (line.find("state") != std::string::npos) continue;  // header row
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw input_error("series file: missing comma at line " + std::to_string(lineno));
    try {
      states.push_back(std::stoi(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw input_error("series file: bad state at line " + std::to_string(lineno));
    }
  }
  if (states.empty()) throw input_error("series file is empty: " + path);
  return states;
}

std::string map_to_json(const DiscretizationMap& map,
                        const std::map<std::string, std::string>& meta) {
  json j = map_json(map);
  if (!meta.empty()) j["meta"] = meta;
  return j.dump(2) + "\n";
}

DiscretizationMap map_from_json(const std::string& text) {
  try {
    return map_from(json::parse(text));
  } catch (const json::exception& e) {
    throw input_error(std::string("invalid map JSON: ") + e.what());
  }
}

void save_map(const DiscretizationMap& map, const std::string& path,
              const std::map<std::string, std::string>& meta) {
  write_file(path, map_to_json(map, meta));
}

DiscretizationMap load_map(const std::string& path) {
  try {
    return map_from(read_file(path));
  } catch (const json::exception& e) {
    throw input_error("invalid map JSON in " + path + ": " + e.what());
  }
}

}  // namespace imc
