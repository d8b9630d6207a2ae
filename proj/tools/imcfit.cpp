// imcfit: fit indexed Markov chain models to high-frequency return series,
// locate volatility-regime thresholds, test them by bootstrap, and compute
// first-passage distributions of the volatility index.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "imc/changepoint.hpp"
#include "imc/diagnostics.hpp"
#include "imc/errors.hpp"
#include "imc/first_passage.hpp"
#include "imc/hypothesis.hpp"
#include "imc/market_data.hpp"
#include "imc/model_io.hpp"
#include "imc/parallel.hpp"
#include "imc/simulate.hpp"
#include "imc/version.hpp"

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// artifacts and metadata

// Removes everything written by a failed command so no partial artifact
// survives a nonzero exit.
class ArtifactSink {
 public:
  ~ArtifactSink() {
    if (!committed_)
      for (const auto& p : paths_) std::remove(p.c_str());
  }
  void track(const std::string& path) { paths_.push_back(path); }
  void commit() { committed_ = true; }

 private:
  std::vector<std::string> paths_;
  bool committed_ = false;
};

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::map<std::string, std::string> make_meta(const CLI::App* cmd) {
  std::map<std::string, std::string> meta;
  meta["tool"] = "imcfit";
  meta["version"] = imc::version;
  meta["config"] = fnv1a_hex(cmd->get_name() + "\n" + cmd->config_to_str(true, false));
  return meta;
}

json meta_json(const std::map<std::string, std::string>& meta) {
  json j;
  for (const auto& [k, v] : meta) j[k] = v;
  return j;
}

void write_text_file(const std::string& path, const std::string& text, ArtifactSink& sink) {
  sink.track(path);
  std::ofstream out(path);
  if (!out) throw imc::input_error("cannot write file: " + path);
  out << text;
  if (!out) throw imc::input_error("failed writing file: " + path);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_header(const std::map<std::string, std::string>& meta) {
  std::string out;
  for (const auto& [k, v] : meta) out += "# " + k + "=" + v + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// shared option bundles

struct SeriesArgs {
  std::string series_path;
  std::string map_path;

  void attach(CLI::App* cmd) {
    cmd->add_option("--series", series_path, "Discretized state series CSV (n,state)")
        ->required();
    cmd->add_option("--map", map_path, "Discretization map JSON")->required();
  }

  imc::DiscreteReturnSeries load() const {
    imc::DiscreteReturnSeries J;
    J.map = imc::load_map(map_path);
    J.states = imc::load_state_series(series_path);
    for (int s : J.states)
      if (s < -J.map.z_min || s > J.map.z_max)
        throw imc::input_error("series state outside the grid of " + map_path);
    return J;
  }
};

struct IndexArgs {
  int memory = 30;
  std::string index_fn = "square";
  std::string units = "normalized";

  void attach(CLI::App* cmd) {
    cmd->add_option("--memory", memory, "Index window length m")->check(CLI::PositiveNumber);
    cmd->add_option("--index-fn", index_fn, "Index function")
        ->check(CLI::IsMember({"square", "abs", "identity"}));
    cmd->add_option("--units", units, "Index units convention")
        ->check(CLI::IsMember({"normalized", "raw"}));
  }

  imc::IndexSpec spec(const imc::DiscretizationMap& map) const {
    return {map, memory, imc::IndexFunction::parse(index_fn),
            units == "raw" ? imc::IndexUnits::raw : imc::IndexUnits::normalized};
  }
};

struct GridArgs {
  std::size_t grid_n = 20;
  std::string grid_mode = "quantile";
  std::int64_t min_exposure = 100;

  void attach(CLI::App* cmd) {
    cmd->add_option("--grid-n", grid_n, "Number of candidate thresholds")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--grid-mode", grid_mode, "Candidate placement")
        ->check(CLI::IsMember({"quantile", "uniform"}));
    cmd->add_option("--min-exposure", min_exposure,
                    "Minimum transitions on each side of a candidate");
  }

  imc::CandidateGrid build(const imc::IndexSeries& V) const {
    imc::GridOptions opts;
    opts.mode = grid_mode == "uniform" ? imc::GridOptions::Mode::uniform
                                       : imc::GridOptions::Mode::quantile;
    opts.min_exposure = min_exposure;
    imc::CandidateGrid grid = imc::candidate_grid(V, grid_n, opts);
    if (grid.dropped > 0)
      std::cerr << "warning: dropped " << grid.dropped
                << " candidate(s) violating the exposure rule\n";
    return grid;
  }
};

// ---------------------------------------------------------------------------
// serialization of results

json fit_to_json(const imc::ChangePointFit& fit, const imc::IndexSpec& spec) {
  json j;
  j["k"] = fit.k;
  j["thresholds"] = fit.thresholds;
  j["log_lik"] = fit.log_lik;
  j["null_log_lik"] = fit.null_log_lik;
  j["distance"] = fit.distance;
  j["aic"] = fit.aic;
  j["bic"] = fit.bic;
  j["grid"] = fit.grid.points;
  j["memory"] = spec.memory;
  j["index_function"] = spec.f.tag();
  j["index_units"] = spec.units == imc::IndexUnits::raw ? "raw" : "normalized";
  return j;
}

std::string trace_csv(const std::vector<imc::SelectionTraceRow>& trace,
                      const std::map<std::string, std::string>& meta) {
  auto pct = [](double v) { return std::isfinite(v) ? fmt_double(v) : std::string(); };
  std::string out = csv_header(meta);
  out += "k,D,pct_delta_D,AIC,pct_delta_AIC,BIC,pct_delta_BIC\n";
  for (const auto& r : trace) {
    out += std::to_string(r.k) + "," + fmt_double(r.distance) + "," +
           pct(r.pct_delta_distance) + "," + fmt_double(r.aic) + "," + pct(r.pct_delta_aic) +
           "," + fmt_double(r.bic) + "," + pct(r.pct_delta_bic) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// subcommand state

struct IngestCmd {
  std::string input;
  std::int64_t period = 60'000;
  int z_min = 2, z_max = 2;
  std::optional<double> delta;
  std::string session_open, session_close;
  std::string out_series = "discretized.csv";
  std::string out_map = "map.json";
  std::string format = "csv";
  CLI::App* app = nullptr;
};

struct FitCmd {
  SeriesArgs series;
  IndexArgs index;
  GridArgs grid;
  int k = -1;
  bool auto_k = false;
  std::string criterion = "bic";
  std::size_t k_max = 8;
  double improvement_floor = 0.001;
  std::string strategy = "dp";
  std::string out_model = "model.json";
  std::string out_fit = "fit.json";
  std::string out_trace = "trace.csv";
  std::string out_index;
  CLI::App* app = nullptr;
};

struct TestCmd {
  SeriesArgs series;
  std::string fit_path;
  std::uint64_t seed = 0;
  std::size_t bootstrap = 1000;
  std::vector<double> alphas;
  bool fixed_psi = false;
  int threads = 0;
  std::string out_test = "test.json";
  std::string out_samples = "dsamples.csv";
  CLI::App* app = nullptr;
};

struct SimulateCmd {
  std::string model_path;
  std::size_t length = 0;
  std::uint64_t seed = 0;
  std::string init = "zeros";
  std::string out = "traj.csv";
  CLI::App* app = nullptr;
};

struct FptCmd {
  std::string model_path;
  std::size_t target_regime = 1;  // 1-based
  std::size_t horizon = 0;
  bool exact = false;
  std::size_t mc = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string window;
  std::string window_from;
  int threads = 0;
  std::string out = "fpt.csv";
  CLI::App* app = nullptr;
};

struct AcfCmd {
  std::string series_path, map_path, returns_path;
  std::size_t max_lag = 1000;
  std::string out = "acf.csv";
  CLI::App* app = nullptr;
};

struct MatdistCmd {
  std::string a, b;
  std::string out;
  CLI::App* app = nullptr;
};

struct ReportCmd {
  SeriesArgs series;
  IndexArgs index;
  GridArgs grid;
  std::string criterion = "bic";
  std::size_t k_max = 8;
  double improvement_floor = 0.001;
  std::uint64_t seed = 0;
  std::size_t bootstrap = 1000;
  std::vector<double> alphas;
  std::size_t max_lag = 100;
  int threads = 0;
  std::string out_dir = "report";
  CLI::App* app = nullptr;
};

// ---------------------------------------------------------------------------
// command implementations

int run_ingest(const IngestCmd& cmd) {
  ArtifactSink sink;
  auto meta = make_meta(cmd.app);

  const imc::TickSeries ticks = imc::load_ticks_file(cmd.input);
  imc::ReturnSeries returns;
  if (!cmd.session_open.empty()) {
    auto parse_hhmm = [](const std::string& s) -> std::int64_t {
      int h = 0, m = 0;
      if (std::sscanf(s.c_str(), "%d:%d", &h, &m) != 2 || h < 0 || h > 24 || m < 0 || m > 59)
        throw imc::input_error("session time must be HH:MM: " + s);
      return (h * 60LL + m) * 60'000LL;
    };
    const imc::SessionCalendar cal{parse_hhmm(cmd.session_open), parse_hhmm(cmd.session_close)};
    const auto sessions = imc::resample_sessions(ticks, cmd.period, cal);
    returns = imc::log_returns(std::span<const imc::PriceSeries>(sessions));
  } else {
    returns = imc::log_returns(imc::resample(ticks, cmd.period));
  }

  const imc::DiscretizationMap map = imc::build_map(returns, cmd.z_min, cmd.z_max, cmd.delta);
  const imc::DiscreteReturnSeries J = imc::discretize(returns, map);

  if (cmd.format == "json") {
    json arr = json::array();
    for (int s : J.states) arr.push_back(s);
    write_text_file(cmd.out_series, arr.dump() + "\n", sink);
  } else {
    sink.track(cmd.out_series);
    imc::save_state_series(J, cmd.out_series, meta);
  }
  meta["ticks"] = std::to_string(ticks.records.size());
  meta["malformed_rows"] = std::to_string(ticks.malformed_rows);
  meta["reordered_rows"] = std::to_string(ticks.reordered_rows);
  meta["returns"] = std::to_string(returns.values.size());
  sink.track(cmd.out_map);
  imc::save_map(map, cmd.out_map, meta);

  std::cout << "ingested " << ticks.records.size() << " ticks (" << ticks.malformed_rows
            << " malformed, " << ticks.reordered_rows << " out of order)\n"
            << "returns: " << returns.values.size() << ", delta = " << map.delta
            << ", states = " << map.num_states() << "\n"
            << "wrote " << cmd.out_series << ", " << cmd.out_map << "\n";
  sink.commit();
  return 0;
}

int run_fit(const FitCmd& cmd) {
  ArtifactSink sink;
  const auto meta = make_meta(cmd.app);

  const imc::DiscreteReturnSeries J = cmd.series.load();
  const imc::IndexSpec spec = cmd.index.spec(J.map);
  const imc::IndexSeries V = imc::compute_index(J, spec);
  const imc::CandidateGrid grid = cmd.grid.build(V);

  imc::ChangePointFit fit;
  if (cmd.auto_k) {
    const auto crit = cmd.criterion == "aic" ? imc::Criterion::aic : imc::Criterion::bic;
    fit = imc::select_k(J, V, grid, cmd.k_max, crit, cmd.improvement_floor);
  } else {
    if (cmd.k < 0) throw imc::input_error("give --k or --auto");
    const auto strategy = cmd.strategy == "exhaustive" ? imc::SearchStrategy::exhaustive
                                                       : imc::SearchStrategy::dp;
    fit = imc::search_multi(J, V, grid, static_cast<std::size_t>(cmd.k), strategy);
  }

  sink.track(cmd.out_model);
  imc::save_model(fit.model, cmd.out_model, meta);

  json jfit = fit_to_json(fit, spec);
  jfit["meta"] = meta_json(meta);
  write_text_file(cmd.out_fit, jfit.dump(2) + "\n", sink);

  if (cmd.auto_k) write_text_file(cmd.out_trace, trace_csv(fit.trace, meta), sink);
  if (!cmd.out_index.empty()) {
    std::string csv = csv_header(meta) + "n,V\n";
    for (std::size_t t = 0; t < V.size(); ++t)
      csv += std::to_string(t + V.first) + "," + fmt_double(V.values[t]) + "\n";
    write_text_file(cmd.out_index, csv, sink);
  }

  std::cout << "k = " << fit.k << ", thresholds:";
  for (double t : fit.thresholds) std::cout << " " << t;
  std::cout << "\nlogL = " << fit.log_lik << ", D = " << fit.distance << ", AIC = " << fit.aic
            << ", BIC = " << fit.bic << "\nwrote " << cmd.out_model << ", " << cmd.out_fit;
  if (cmd.auto_k) std::cout << ", " << cmd.out_trace;
  std::cout << "\n";
  sink.commit();
  return 0;
}

// Rebuilds the fitted statistic and bootstraps its null distribution.
int run_test(const TestCmd& cmd) {
  ArtifactSink sink;
  const auto meta = make_meta(cmd.app);

  const imc::DiscreteReturnSeries J = cmd.series.load();

  std::ifstream fin(cmd.fit_path);
  if (!fin) throw imc::input_error("cannot open fit file: " + cmd.fit_path);
  json jfit;
  try {
    fin >> jfit;
  } catch (const json::exception& e) {
    throw imc::input_error("invalid fit JSON in " + cmd.fit_path + ": " + e.what());
  }

  imc::IndexSpec spec;
  imc::CandidateGrid grid;
  std::size_t k = 1;
  std::vector<double> thresholds;
  try {
    spec.map = J.map;
    spec.memory = jfit.at("memory").get<int>();
    spec.f = imc::IndexFunction::parse(jfit.at("index_function").get<std::string>());
    spec.units = jfit.value("index_units", "normalized") == "raw" ? imc::IndexUnits::raw
                                                                  : imc::IndexUnits::normalized;
    grid.points = jfit.at("grid").get<std::vector<double>>();
    k = jfit.at("k").get<std::size_t>();
    thresholds = jfit.at("thresholds").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw imc::input_error("fit JSON missing fields: " + std::string(e.what()));
  }
  if (k < 1) throw imc::input_error("test needs a fit with at least one threshold");

  const imc::IndexSeries V = imc::compute_index(J, spec);
  const imc::BinnedCounts bins(J, V, grid);
  const double null_ll = bins.interval_loglik(0, bins.cells() - 1);
  double d_hat;
  if (cmd.fixed_psi) {
    const imc::CountTensor split = imc::count_transitions(J, V, imc::Partition{thresholds});
    d_hat = imc::distance_statistic(imc::log_likelihood(split), null_ll);
  } else {
    const imc::SearchResult found = imc::search_binned(bins, k, imc::SearchStrategy::dp);
    d_hat = imc::distance_statistic(found.log_lik, null_ll);
  }

  // Null model: single matrix over all transitions, empirical start states.
  const imc::CountTensor whole = imc::count_transitions(J, V, imc::Partition{});
  const imc::Matrix p_null = imc::estimate_matrices(whole).matrices[0];

  imc::BootstrapOptions opts;
  opts.k = k;
  opts.research = !cmd.fixed_psi;
  if (cmd.fixed_psi) opts.fixed_thresholds = thresholds;
  opts.initial_distribution = imc::state_frequencies(J);
  opts.threads = cmd.threads;

  const imc::NullDistribution dist =
      imc::bootstrap_null(p_null, spec, J.size(), cmd.bootstrap, grid, cmd.seed, opts);

  std::vector<double> alphas = cmd.alphas;
  if (alphas.empty()) alphas = {0.05};
  const imc::TestResult result = imc::hypothesis_test(dist, d_hat, alphas);

  json jt;
  jt["d_hat"] = result.d_hat;
  jt["p_value"] = result.p;
  jt["replicates"] = result.replicates;
  jt["mode"] = cmd.fixed_psi ? "fixed-psi" : "research";
  jt["seed"] = cmd.seed;
  json jcrit = json::object(), jrej = json::object();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const std::string key = fmt_double(alphas[i]);
    jcrit[key] = result.critical_values[i].second;
    jrej[key] = result.reject[i].second;
  }
  jt["critical_values"] = jcrit;
  jt["reject"] = jrej;
  jt["meta"] = meta_json(meta);
  write_text_file(cmd.out_test, jt.dump(2) + "\n", sink);

  std::string csv = csv_header(meta) + "replicate,D\n";
  for (std::size_t b = 0; b < dist.samples.size(); ++b)
    csv += std::to_string(b) + "," + fmt_double(dist.samples[b]) + "\n";
  write_text_file(cmd.out_samples, csv, sink);

  std::cout << "D_hat = " << result.d_hat << ", p-value = " << result.p
            << " (B = " << cmd.bootstrap << ")\n";
  for (std::size_t i = 0; i < alphas.size(); ++i)
    std::cout << "alpha = " << alphas[i] << ": d_alpha = " << result.critical_values[i].second
              << (result.reject[i].second ? "  -> reject H0" : "  -> keep H0") << "\n";
  std::cout << "wrote " << cmd.out_test << ", " << cmd.out_samples << "\n";
  sink.commit();
  return 0;
}

std::vector<int> parse_state_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw imc::input_error("bad state list entry: " + item);
    }
  }
  return out;
}

int run_simulate(const SimulateCmd& cmd) {
  ArtifactSink sink;
  auto meta = make_meta(cmd.app);
  meta["seed"] = std::to_string(cmd.seed);

  const imc::RegimeModel model = imc::load_model(cmd.model_path);
  imc::SimulationConfig cfg;
  cfg.length = cmd.length;
  cfg.seed = cmd.seed;
  if (cmd.init.rfind("from:", 0) == 0) {
    const std::vector<int> states = imc::load_state_series(cmd.init.substr(5));
    const std::size_t m = static_cast<std::size_t>(model.spec.memory);
    if (states.size() < m) throw imc::input_error("initial-window series shorter than m");
    cfg.initial_window.assign(states.end() - static_cast<std::ptrdiff_t>(m), states.end());
  } else if (cmd.init != "zeros") {
    cfg.initial_window = parse_state_list(cmd.init);
  }

  const imc::DiscreteReturnSeries traj = imc::simulate_imc(model, cfg);
  sink.track(cmd.out);
  imc::save_state_series(traj, cmd.out, meta);
  std::cout << "simulated " << traj.size() << " states -> " << cmd.out << "\n";
  sink.commit();
  return 0;
}

int run_fpt(const FptCmd& cmd) {
  ArtifactSink sink;
  auto meta = make_meta(cmd.app);

  const imc::RegimeModel model = imc::load_model(cmd.model_path);
  const std::size_t m = static_cast<std::size_t>(model.spec.memory);

  if (cmd.target_regime < 1 || cmd.target_regime > model.partition.intervals())
    throw imc::input_error("target regime must lie in 1.." +
                           std::to_string(model.partition.intervals()));
  if (!cmd.exact && cmd.mc == 0) throw imc::input_error("choose --exact or --mc <replicates>");
  if (cmd.mc > 0 && !cmd.seed_given) throw imc::input_error("--mc requires --seed");

  imc::WindowState window;
  if (!cmd.window_from.empty()) {
    const std::vector<int> states = imc::load_state_series(cmd.window_from);
    if (states.size() < m) throw imc::input_error("window series shorter than m");
    window.states.assign(states.end() - static_cast<std::ptrdiff_t>(m), states.end());
  } else if (!cmd.window.empty()) {
    window.states = parse_state_list(cmd.window);
  } else {
    window.states.assign(m, 0);
  }

  const imc::TargetInterval target = imc::TargetInterval::regime(model, cmd.target_regime - 1);
  imc::FirstPassageDistribution dist;
  if (cmd.exact) {
    dist = imc::first_passage_exact(model, window, target, cmd.horizon);
  } else {
    meta["seed"] = std::to_string(cmd.seed);
    dist = imc::first_passage_mc(model, window, target, cmd.horizon, cmd.mc, cmd.seed,
                                 cmd.threads);
  }

  meta["method"] = dist.method;
  std::string csv = csv_header(meta) + "n,g,stderr\n";
  for (std::size_t n = 0; n < dist.g.size(); ++n)
    csv += std::to_string(n + 1) + "," + fmt_double(dist.g[n]) + "," +
           (dist.std_error.empty() ? "" : fmt_double(dist.std_error[n])) + "\n";
  write_text_file(cmd.out, csv, sink);

  double mass = 0.0;
  for (double g : dist.g) mass += g;
  std::cout << dist.method << " first-passage into regime " << cmd.target_regime << ": P(T <= "
            << cmd.horizon << ") = " << mass << ", tail = " << dist.tail_mass << "\nwrote "
            << cmd.out << "\n";
  sink.commit();
  return 0;
}

int run_acf(const AcfCmd& cmd) {
  ArtifactSink sink;
  const auto meta = make_meta(cmd.app);

  imc::ACFResult acf;
  if (!cmd.returns_path.empty()) {
    std::ifstream in(cmd.returns_path);
    if (!in) throw imc::input_error("cannot open returns file: " + cmd.returns_path);
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line.front() == '#') continue;
      const auto comma = line.find_last_of(',');
      const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
      try {
        values.push_back(std::stod(field));
      } catch (const std::exception&) {
        continue;  // header or junk line
      }
    }
    if (values.empty()) throw imc::input_error("no numeric returns in " + cmd.returns_path);
    acf = imc::acf_squared(values, cmd.max_lag);
  } else if (!cmd.series_path.empty()) {
    if (cmd.map_path.empty()) throw imc::input_error("--series needs --map");
    imc::DiscreteReturnSeries J;
    J.map = imc::load_map(cmd.map_path);
    J.states = imc::load_state_series(cmd.series_path);
    acf = imc::acf_squared(J, cmd.max_lag);
  } else {
    throw imc::input_error("give either --series/--map or --returns");
  }

  std::string csv = csv_header(meta) + "lag,acf\n";
  for (std::size_t lag = 1; lag <= acf.max_lag(); ++lag)
    csv += std::to_string(lag) + "," + fmt_double(acf.at(lag)) + "\n";
  write_text_file(cmd.out, csv, sink);
  std::cout << "wrote " << cmd.out << " (" << acf.max_lag() << " lags)\n";
  sink.commit();
  return 0;
}

int run_matdist(const MatdistCmd& cmd) {
  ArtifactSink sink;
  const std::vector<imc::Matrix> a = imc::load_matrices(cmd.a);
  const std::vector<imc::Matrix> b = imc::load_matrices(cmd.b);

  json j;
  if (a.size() == 1 && b.size() == 1) {
    j["rsmd"] = imc::rsmd(a[0], b[0]);
    j["mad"] = imc::mad(a[0], b[0]);
    std::cout << "%RSMD = " << j["rsmd"].get<double>() << "\n%MAD  = " << j["mad"].get<double>()
              << "\n";
  } else {
    if (a.size() != b.size()) throw imc::input_error("matrix counts differ between the two files");
    json jr = json::array(), jm = json::array();
    for (std::size_t i = 0; i < a.size(); ++i) {
      json row_r = json::array(), row_m = json::array();
      for (std::size_t jdx = 0; jdx < b.size(); ++jdx) {
        row_r.push_back(imc::rsmd(a[i], b[jdx]));
        row_m.push_back(imc::mad(a[i], b[jdx]));
      }
      jr.push_back(row_r);
      jm.push_back(row_m);
    }
    j["rsmd"] = jr;
    j["mad"] = jm;
    std::cout << "pairwise %RSMD:\n";
    for (const auto& row : jr) {
      for (const auto& v : row) std::printf("  %6.1f", v.get<double>());
      std::printf("\n");
    }
    std::cout << "pairwise %MAD:\n";
    for (const auto& row : jm) {
      for (const auto& v : row) std::printf("  %6.1f", v.get<double>());
      std::printf("\n");
    }
  }
  if (!cmd.out.empty()) {
    j["meta"] = meta_json(make_meta(cmd.app));
    write_text_file(cmd.out, j.dump(2) + "\n", sink);
  }
  sink.commit();
  return 0;
}

int run_report(const ReportCmd& cmd) {
  ArtifactSink sink;
  const auto meta = make_meta(cmd.app);
  std::filesystem::create_directories(cmd.out_dir);
  const auto path = [&](const std::string& name) { return cmd.out_dir + "/" + name; };

  const imc::DiscreteReturnSeries J = cmd.series.load();
  const imc::IndexSpec spec = cmd.index.spec(J.map);
  const imc::IndexSeries V = imc::compute_index(J, spec);
  const imc::CandidateGrid grid = cmd.grid.build(V);
  std::vector<double> alphas = cmd.alphas;
  if (alphas.empty()) alphas = {0.05, 0.01};

  // model selection over k
  const auto crit = cmd.criterion == "aic" ? imc::Criterion::aic : imc::Criterion::bic;
  const imc::ChangePointFit fit =
      imc::select_k(J, V, grid, cmd.k_max, crit, cmd.improvement_floor);
  sink.track(path("model.json"));
  imc::save_model(fit.model, path("model.json"), meta);
  json jfit = fit_to_json(fit, spec);
  jfit["meta"] = meta_json(meta);
  write_text_file(path("fit.json"), jfit.dump(2) + "\n", sink);
  write_text_file(path("trace.csv"), trace_csv(fit.trace, meta), sink);

  // single change point fit + bootstrap test on it
  const imc::ChangePointFit single = imc::search_single(J, V, grid);
  const imc::CountTensor whole = imc::count_transitions(J, V, imc::Partition{});
  const imc::Matrix p_null = imc::estimate_matrices(whole).matrices[0];
  imc::BootstrapOptions opts;
  opts.k = 1;
  opts.initial_distribution = imc::state_frequencies(J);
  opts.threads = cmd.threads;
  const imc::NullDistribution dist =
      imc::bootstrap_null(p_null, spec, J.size(), cmd.bootstrap, grid, cmd.seed, opts);
  const imc::TestResult test = imc::hypothesis_test(dist, single.distance, alphas);

  std::string samples_csv = csv_header(meta) + "replicate,D\n";
  for (std::size_t b = 0; b < dist.samples.size(); ++b)
    samples_csv += std::to_string(b) + "," + fmt_double(dist.samples[b]) + "\n";
  write_text_file(path("dsamples.csv"), samples_csv, sink);

  json jt;
  jt["psi_1"] = single.thresholds.empty() ? 0.0 : single.thresholds[0];
  jt["d_hat"] = test.d_hat;
  jt["p_value"] = test.p;
  jt["replicates"] = test.replicates;
  for (std::size_t i = 0; i < alphas.size(); ++i)
    jt["critical_values"][fmt_double(alphas[i])] = test.critical_values[i].second;
  jt["meta"] = meta_json(meta);
  write_text_file(path("test.json"), jt.dump(2) + "\n", sink);

  // pairwise distances of the selected model's matrices
  const auto& mats = fit.model.matrices.matrices;
  std::string rs = csv_header(meta), md = csv_header(meta);
  for (std::size_t i = 0; i < mats.size(); ++i) {
    for (std::size_t jdx = 0; jdx < mats.size(); ++jdx) {
      rs += (jdx ? "," : "") + fmt_double(imc::rsmd(mats[i], mats[jdx]));
      md += (jdx ? "," : "") + fmt_double(imc::mad(mats[i], mats[jdx]));
    }
    rs += "\n";
    md += "\n";
  }
  write_text_file(path("distances_rsmd.csv"), rs, sink);
  write_text_file(path("distances_mad.csv"), md, sink);

  // autocorrelation of squared returns
  const imc::ACFResult acf = imc::acf_squared(J, cmd.max_lag);
  std::string acf_csv = csv_header(meta) + "lag,acf\n";
  for (std::size_t lag = 1; lag <= acf.max_lag(); ++lag)
    acf_csv += std::to_string(lag) + "," + fmt_double(acf.at(lag)) + "\n";
  write_text_file(path("acf.csv"), acf_csv, sink);

  // structural inequalities
  const imc::RegimeStructureReport structure = imc::regime_structure_report(fit.model);
  json js;
  js["applicable"] = structure.applicable;
  if (!structure.applicable) js["reason"] = structure.reason;
  js["passed"] = structure.passed();
  js["total"] = structure.checks.size();
  json checks = json::array();
  for (const auto& c : structure.checks)
    checks.push_back(json{{"family", c.family},
                          {"i", c.source_state},
                          {"h", c.regime},
                          {"lhs", c.lhs},
                          {"rhs", c.rhs},
                          {"pass", c.pass}});
  js["checks"] = std::move(checks);
  js["meta"] = meta_json(meta);
  write_text_file(path("regime_report.json"), js.dump(2) + "\n", sink);

  // human-readable summary
  std::ostringstream txt;
  txt << "imcfit report\n=============\n\n";
  txt << "series: " << cmd.series.series_path << " (" << J.size()
      << " states, |E| = " << J.map.num_states() << ")\n";
  txt << "index: f = " << spec.f.tag() << ", m = " << spec.memory << ", grid n = " << grid.size()
      << "\n\n";
  txt << "selected k = " << fit.k << " by " << cmd.criterion << "\nthresholds:";
  for (double t : fit.thresholds) txt << " " << t;
  txt << "\n\nselection trace (k, D, %dD, AIC, %dAIC, BIC, %dBIC)\n";
  for (const auto& r : fit.trace) {
    auto pct = [](double v) {
      char cell[24];
      if (std::isfinite(v))
        std::snprintf(cell, sizeof cell, "%7.2f%%", v);
      else
        std::snprintf(cell, sizeof cell, "%8s", "-");
      return std::string(cell);
    };
    char line[256];
    std::snprintf(line, sizeof line, "  %2d  %12.1f  %s  %14.1f  %s  %14.1f  %s\n", r.k,
                  r.distance, pct(r.pct_delta_distance).c_str(), r.aic,
                  pct(r.pct_delta_aic).c_str(), r.bic, pct(r.pct_delta_bic).c_str());
    txt << line;
  }
  txt << "\nsingle change point test (B = " << cmd.bootstrap << ", seed = " << cmd.seed << ")\n";
  txt << "  psi_1 = " << (single.thresholds.empty() ? 0.0 : single.thresholds[0])
      << ", D = " << test.d_hat << ", p-value = " << test.p << "\n";
  for (std::size_t i = 0; i < alphas.size(); ++i)
    txt << "  D*(" << 1.0 - alphas[i] << ") = " << test.critical_values[i].second
        << (test.reject[i].second ? "  reject H0" : "  keep H0") << "\n";
  txt << "\npairwise %RSMD of the selected regime matrices\n";
  for (std::size_t i = 0; i < mats.size(); ++i) {
    txt << " ";
    for (std::size_t jdx = 0; jdx < mats.size(); ++jdx) {
      char cell[32];
      std::snprintf(cell, sizeof cell, " %6.1f", imc::rsmd(mats[i], mats[jdx]));
      txt << cell;
    }
    txt << "\n";
  }
  txt << "\npairwise %MAD of the selected regime matrices\n";
  for (std::size_t i = 0; i < mats.size(); ++i) {
    txt << " ";
    for (std::size_t jdx = 0; jdx < mats.size(); ++jdx) {
      char cell[32];
      std::snprintf(cell, sizeof cell, " %6.1f", imc::mad(mats[i], mats[jdx]));
      txt << cell;
    }
    txt << "\n";
  }
  txt << "\nregime structure: ";
  if (structure.applicable)
    txt << structure.passed() << "/" << structure.checks.size() << " inequalities hold\n";
  else
    txt << structure.reason << "\n";
  write_text_file(path("report.txt"), txt.str(), sink);

  std::cout << txt.str() << "\nartifacts in " << cmd.out_dir << "/\n";
  sink.commit();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indexed Markov chain fitting for high-frequency returns"};
  app.set_version_flag("--version", imc::version);
  app.set_config("--config", "", "Config file with key=value options");
  app.require_subcommand(1);

  IngestCmd ingest;
  {
    auto* c = app.add_subcommand("ingest", "Ticks CSV -> resampled, discretized return series");
    ingest.app = c;
    c->add_option("--input", ingest.input, "Tick CSV with timestamp,price header")->required();
    c->add_option("--period", ingest.period, "Resampling period in milliseconds")
        ->check(CLI::PositiveNumber);
    c->add_option("--z-min", ingest.z_min, "Negative grid states");
    c->add_option("--z-max", ingest.z_max, "Positive grid states");
    c->add_option("--delta", ingest.delta, "Grid amplitude (default: 2-sigma rule)");
    c->add_option("--session-open", ingest.session_open, "Session open HH:MM (UTC)");
    c->add_option("--session-close", ingest.session_close, "Session close HH:MM (UTC)")
        ->needs("--session-open");
    c->add_option("--out-series", ingest.out_series, "Output series path");
    c->add_option("--out-map", ingest.out_map, "Output map path");
    c->add_option("--format", ingest.format, "Series output format")
        ->check(CLI::IsMember({"csv", "json"}));
  }

  FitCmd fit;
  {
    auto* c = app.add_subcommand("fit", "Locate volatility-regime thresholds");
    fit.app = c;
    fit.series.attach(c);
    fit.index.attach(c);
    fit.grid.attach(c);
    auto* kopt = c->add_option("--k", fit.k, "Number of thresholds")->check(CLI::NonNegativeNumber);
    auto* aopt = c->add_flag("--auto", fit.auto_k, "Select k by information criterion");
    kopt->excludes(aopt);
    c->add_option("--criterion", fit.criterion, "Criterion for --auto")
        ->check(CLI::IsMember({"aic", "bic"}));
    c->add_option("--k-max", fit.k_max, "Largest k tried by --auto");
    c->add_option("--improvement-floor", fit.improvement_floor,
                  "Relative criterion change that stops --auto");
    c->add_option("--strategy", fit.strategy, "Search strategy")
        ->check(CLI::IsMember({"dp", "exhaustive"}));
    c->add_option("--out-model", fit.out_model, "Model output path");
    c->add_option("--out-fit", fit.out_fit, "Fit summary output path");
    c->add_option("--out-trace", fit.out_trace, "Selection trace CSV (--auto)");
    c->add_option("--out-index", fit.out_index, "Also write the index series CSV");
  }

  TestCmd test;
  {
    auto* c = app.add_subcommand("test", "Bootstrap test of the fitted thresholds");
    test.app = c;
    test.series.attach(c);
    c->add_option("--fit", test.fit_path, "fit.json from the fit command")->required();
    c->add_option("--seed", test.seed, "RNG seed")->required();
    c->add_option("--bootstrap", test.bootstrap, "Number of bootstrap replicates")
        ->check(CLI::PositiveNumber);
    c->add_option("--alpha", test.alphas, "Significance level(s)")
        ->check(CLI::Range(1e-6, 0.999999));
    c->add_flag("--fixed-psi", test.fixed_psi,
                "Evaluate the statistic at the fitted thresholds instead of re-searching");
    c->add_option("--threads", test.threads, "Worker threads (0 = auto)");
    c->add_option("--out-test", test.out_test, "Test result output path");
    c->add_option("--out-samples", test.out_samples, "Bootstrap samples CSV");
  }

  SimulateCmd simulate;
  {
    auto* c = app.add_subcommand("simulate", "Simulate a trajectory from a fitted model");
    simulate.app = c;
    c->add_option("--model", simulate.model_path, "model.json")->required();
    c->add_option("--length", simulate.length, "Trajectory length")
        ->required()
        ->check(CLI::PositiveNumber);
    c->add_option("--seed", simulate.seed, "RNG seed")->required();
    c->add_option("--init", simulate.init,
                  "Initial window: zeros, comma-separated states, or from:SERIES.csv");
    c->add_option("--out", simulate.out, "Output trajectory CSV");
  }

  FptCmd fpt;
  {
    auto* c = app.add_subcommand("fpt", "First-passage time into a volatility regime");
    fpt.app = c;
    c->add_option("--model", fpt.model_path, "model.json")->required();
    c->add_option("--target-regime", fpt.target_regime, "Regime index, 1-based")->required();
    c->add_option("--horizon", fpt.horizon, "Largest step evaluated")
        ->required()
        ->check(CLI::PositiveNumber);
    c->add_flag("--exact", fpt.exact, "Dynamic program over window states");
    c->add_option("--mc", fpt.mc, "Monte Carlo replicate count");
    auto* seed = c->add_option("--seed", fpt.seed, "RNG seed (Monte Carlo)");
    c->parse_complete_callback([&fpt, seed] { fpt.seed_given = seed->count() > 0; });
    c->add_option("--window", fpt.window, "Initial window, comma-separated states");
    c->add_option("--window-from", fpt.window_from, "Take the last m states of a series CSV");
    c->add_option("--threads", fpt.threads, "Worker threads (0 = auto)");
    c->add_option("--out", fpt.out, "Output CSV (n,g,stderr)");
  }

  AcfCmd acf;
  {
    auto* c = app.add_subcommand("acf", "Autocorrelation of squared returns");
    acf.app = c;
    c->add_option("--series", acf.series_path, "Discretized series CSV");
    c->add_option("--map", acf.map_path, "Map JSON for --series");
    c->add_option("--returns", acf.returns_path, "Raw returns CSV (one value per row)");
    c->add_option("--max-lag", acf.max_lag, "Largest lag")->check(CLI::PositiveNumber);
    c->add_option("--out", acf.out, "Output CSV (lag,acf)");
  }

  MatdistCmd matdist;
  {
    auto* c = app.add_subcommand("matdist", "%RSMD and %MAD between transition matrices");
    matdist.app = c;
    c->add_option("a", matdist.a, "First matrix or model JSON")->required();
    c->add_option("b", matdist.b, "Second matrix or model JSON")->required();
    c->add_option("--out", matdist.out, "Also write the result JSON here");
  }

  ReportCmd report;
  {
    auto* c = app.add_subcommand("report", "Fit, test and diagnostics in one run");
    report.app = c;
    report.series.attach(c);
    report.index.attach(c);
    report.grid.attach(c);
    c->add_option("--criterion", report.criterion, "Selection criterion")
        ->check(CLI::IsMember({"aic", "bic"}));
    c->add_option("--k-max", report.k_max, "Largest k tried");
    c->add_option("--improvement-floor", report.improvement_floor,
                  "Relative criterion change that stops the scan");
    c->add_option("--seed", report.seed, "RNG seed")->required();
    c->add_option("--bootstrap", report.bootstrap, "Bootstrap replicates")
        ->check(CLI::PositiveNumber);
    c->add_option("--alpha", report.alphas, "Significance level(s)");
    c->add_option("--max-lag", report.max_lag, "ACF lags");
    c->add_option("--threads", report.threads, "Worker threads (0 = auto)");
    c->add_option("--out-dir", report.out_dir, "Artifact directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the usage error
    return code == 0 ? 0 : 2;
  }

  try {
    if (ingest.app->parsed()) return run_ingest(ingest);
    if (fit.app->parsed()) return run_fit(fit);
    if (test.app->parsed()) return run_test(test);
    if (simulate.app->parsed()) return run_simulate(simulate);
    if (fpt.app->parsed()) return run_fpt(fpt);
    if (acf.app->parsed()) return run_acf(acf);
    if (matdist.app->parsed()) return run_matdist(matdist);
    if (report.app->parsed()) return run_report(report);
  } catch (const imc::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const imc::convergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
