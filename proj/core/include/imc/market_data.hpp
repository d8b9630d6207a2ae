#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace imc {

struct TickRecord {
  std::int64_t timestamp_ms = 0;
  double price = 0.0;
};

struct TickSeries {
  std::vector<TickRecord> records;  // sorted by timestamp after loading
  std::size_t malformed_rows = 0;   // skipped lines (wrong field count, unparsable values)
  std::size_t reordered_rows = 0;   // rows that arrived out of timestamp order
};

struct PriceSeries {
  std::int64_t start_time_ms = 0;  // sampling timestamp of prices[0] (end of its period)
  std::int64_t period_ms = 0;
  std::vector<double> prices;
};

// Log-returns R_n = ln(S_{n+1}/S_n); always one shorter than the price series.
struct ReturnSeries {
  std::vector<double> values;
};

// Symmetric-around-zero grid E = {-z_min*delta, ..., -delta, 0, delta, ..., z_max*delta}.
// A return r maps to state i when r lies in ((i-1/2)*delta, (i+1/2)*delta],
// saturating at -z_min below and z_max above.
struct DiscretizationMap {
  double delta = 0.0;
  int z_min = 0;
  int z_max = 0;

  int num_states() const { return z_min + z_max + 1; }
  int state_of(double r) const;
  double value_of(int state) const { return state * delta; }

  // 0-based row/column index for a state in [-z_min, z_max].
  std::size_t index_of(int state) const { return static_cast<std::size_t>(state + z_min); }
  int state_at(std::size_t index) const { return static_cast<int>(index) - z_min; }

  void validate() const;
};

struct DiscreteReturnSeries {
  std::vector<int> states;  // each in [-z_min, z_max]
  DiscretizationMap map;

  std::size_t size() const { return states.size(); }
};

// Daily trading window in milliseconds since midnight UTC, [open, close).
struct SessionCalendar {
  std::int64_t open_ms = 0;
  std::int64_t close_ms = 86'400'000;
};

// CSV with a `timestamp,price` header; timestamps are ISO-8601 or epoch
// milliseconds (auto-detected). Malformed rows are skipped and counted,
// out-of-order rows are sorted and counted; a non-positive price is an error.
TickSeries load_ticks(std::istream& in);
TickSeries load_ticks_file(const std::string& path);

// One price per period on a grid anchored at epoch zero; the emitted price is
// the last tick strictly before the period boundary, carried forward over
// empty periods.
PriceSeries resample(const TickSeries& ticks, std::int64_t period_ms);

// Same rule applied per trading day, ticks outside the session dropped.
// Returns one series per day with at least one in-session tick, so that no
// return ever spans a session gap.
std::vector<PriceSeries> resample_sessions(const TickSeries& ticks, std::int64_t period_ms,
                                           const SessionCalendar& session);

ReturnSeries log_returns(const PriceSeries& prices);
ReturnSeries log_returns(std::span<const PriceSeries> sessions);

DiscreteReturnSeries discretize(const ReturnSeries& returns, const DiscretizationMap& map);

// Default grid amplitude puts the extreme states at +-2 sample standard
// deviations, i.e. delta = 4*sigma/(z_min+z_max); an explicit delta wins.
DiscretizationMap build_map(const ReturnSeries& returns, int z_min, int z_max,
                            std::optional<double> delta_override = {});

}  // namespace imc
