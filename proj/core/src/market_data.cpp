#include "imc/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "imc/errors.hpp"

namespace imc {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && p == last;
}

bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  out = 0;
  for (std::size_t i = 0; i < len; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    out = out * 10 + (c - '0');
  }
  return true;
}

// "YYYY-MM-DD[T ]HH:MM:SS[.fff][Z]" in UTC.
bool parse_iso8601(std::string_view s, std::int64_t& out_ms) {
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  int y, mo, d, h, mi, sec;
  if (!parse_fixed_uint(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || s[7] != '-' ||
      !parse_fixed_uint(s, 5, 2, mo) || !parse_fixed_uint(s, 8, 2, d))
    return false;
  if (mo < 1 || mo > 12 || d < 1 || d > 31) return false;
  h = mi = sec = 0;
  int ms = 0;
  if (s.size() > 10) {
    if ((s[10] != 'T' && s[10] != ' ') || s.size() < 19 || s[13] != ':' || s[16] != ':' ||
        !parse_fixed_uint(s, 11, 2, h) || !parse_fixed_uint(s, 14, 2, mi) ||
        !parse_fixed_uint(s, 17, 2, sec))
      return false;
    if (h > 23 || mi > 59 || sec > 60) return false;
    if (s.size() > 19) {
      if (s[19] != '.') return false;
      std::size_t ndig = s.size() - 20;
      if (ndig == 0 || ndig > 3) return false;
      int frac;
      if (!parse_fixed_uint(s, 20, ndig, frac)) return false;
      for (std::size_t i = ndig; i < 3; ++i) frac *= 10;
      ms = frac;
    }
  }
  out_ms = days_from_civil(y, mo, d) * 86'400'000LL +
           (static_cast<std::int64_t>(h) * 3600 + mi * 60 + sec) * 1000 + ms;
  return true;
}

bool parse_timestamp(std::string_view s, std::int64_t& out_ms) {
  if (s.find('-', 1) != std::string_view::npos || s.find(':') != std::string_view::npos ||
      s.find('T') != std::string_view::npos)
    return parse_iso8601(s, out_ms);
  return parse_int(s, out_ms);
}

bool parse_price(std::string_view s, double& out) {
  // std::from_chars for double is incomplete on some toolchains; strtod is fine here.
  std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && tmp.size() > 0 && std::isfinite(out);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

int DiscretizationMap::state_of(double r) const {
  const double x = r / delta;
  int i = static_cast<int>(std::ceil(x - 0.5));
  if (i < -z_min) i = -z_min;
  if (i > z_max) i = z_max;
  return i;
}

void DiscretizationMap::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw input_error("discretization map: delta must be positive");
  if (z_min < 0 || z_max < 0 || z_min + z_max < 1)
    throw input_error("discretization map: need z_min, z_max >= 0 and at least 2 states");
}

TickSeries load_ticks(std::istream& in) {
  TickSeries out;
  std::string line;
  std::size_t lineno = 0;
  int ts_col = 0, price_col = 1;
  bool saw_header = false;
  bool saw_data = false;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    auto fields = split_csv(sv);

    if (!saw_header && !saw_data) {
      // Header row: locate the named columns; tolerate extra columns.
      bool looks_like_header = false;
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (fields[c] == "timestamp") { ts_col = static_cast<int>(c); looks_like_header = true; }
        if (fields[c] == "price") { price_col = static_cast<int>(c); looks_like_header = true; }
      }
      if (looks_like_header) {
        saw_header = true;
        continue;
      }
    }

    if (fields.size() <= static_cast<std::size_t>(std::max(ts_col, price_col))) {
      ++out.malformed_rows;
      continue;
    }
    std::int64_t ts;
    double price;
    if (!parse_timestamp(fields[static_cast<std::size_t>(ts_col)], ts) ||
        !parse_price(fields[static_cast<std::size_t>(price_col)], price)) {
      ++out.malformed_rows;
      continue;
    }
    if (price <= 0.0)
      throw input_error("non-positive price at line " + std::to_string(lineno));
    saw_data = true;
    if (!out.records.empty() && ts < out.records.back().timestamp_ms) ++out.reordered_rows;
    out.records.push_back({ts, price});
  }

  if (out.records.empty()) {
    if (out.malformed_rows > 0)
      throw input_error("unparseable tick file: no valid rows (" +
                        std::to_string(out.malformed_rows) + " malformed)");
    throw input_error("empty tick file");
  }
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const TickRecord& a, const TickRecord& b) {
                     return a.timestamp_ms < b.timestamp_ms;
                   });
  return out;
}

TickSeries load_ticks_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open tick file: " + path);
  return load_ticks(in);
}

PriceSeries resample(const TickSeries& ticks, std::int64_t period_ms) {
  if (period_ms <= 0) throw input_error("resample period must be positive");
  if (ticks.records.empty()) throw input_error("no ticks to resample");

  const auto& recs = ticks.records;
  const std::int64_t first_bucket = floor_div(recs.front().timestamp_ms, period_ms);
  const std::int64_t last_bucket = floor_div(recs.back().timestamp_ms, period_ms);

  PriceSeries out;
  out.period_ms = period_ms;
  out.start_time_ms = (first_bucket + 1) * period_ms;
  out.prices.reserve(static_cast<std::size_t>(last_bucket - first_bucket + 1));

  std::size_t idx = 0;
  double last_price = recs.front().price;
  for (std::int64_t b = first_bucket; b <= last_bucket; ++b) {
    const std::int64_t boundary = (b + 1) * period_ms;
    while (idx < recs.size() && recs[idx].timestamp_ms < boundary) {
      last_price = recs[idx].price;
      ++idx;
    }
    out.prices.push_back(last_price);
  }
  return out;
}

std::vector<PriceSeries> resample_sessions(const TickSeries& ticks, std::int64_t period_ms,
                                           const SessionCalendar& session) {
  if (period_ms <= 0) throw input_error("resample period must be positive");
  if (session.open_ms >= session.close_ms)
    throw input_error("session calendar: open must precede close");

  std::vector<PriceSeries> out;
  TickSeries day;
  std::int64_t current_day = 0;
  auto flush = [&] {
    if (!day.records.empty()) {
      out.push_back(resample(day, period_ms));
      day.records.clear();
    }
  };
  for (const auto& r : ticks.records) {
    const std::int64_t d = floor_div(r.timestamp_ms, 86'400'000LL);
    const std::int64_t ms_of_day = r.timestamp_ms - d * 86'400'000LL;
    if (ms_of_day < session.open_ms || ms_of_day >= session.close_ms) continue;
    if (day.records.empty() || d == current_day) {
      current_day = d;
    } else {
      flush();
      current_day = d;
    }
    day.records.push_back(r);
  }
  flush();
  return out;
}

ReturnSeries log_returns(const PriceSeries& prices) {
  if (prices.prices.size() < 2) throw input_error("log returns need at least 2 prices");
  ReturnSeries out;
  out.values.reserve(prices.prices.size() - 1);
  for (std::size_t n = 0; n + 1 < prices.prices.size(); ++n)
    out.values.push_back(std::log(prices.prices[n + 1] / prices.prices[n]));
  return out;
}

ReturnSeries log_returns(std::span<const PriceSeries> sessions) {
  ReturnSeries out;
  for (const auto& s : sessions) {
    if (s.prices.size() < 2) continue;
    ReturnSeries r = log_returns(s);
    out.values.insert(out.values.end(), r.values.begin(), r.values.end());
  }
  if (out.values.empty()) throw input_error("log returns: no session has 2 or more prices");
  return out;
}

DiscreteReturnSeries discretize(const ReturnSeries& returns, const DiscretizationMap& map) {
  map.validate();
  DiscreteReturnSeries out;
  out.map = map;
  out.states.reserve(returns.values.size());
  for (double r : returns.values) out.states.push_back(map.state_of(r));
  return out;
}

DiscretizationMap build_map(const ReturnSeries& returns, int z_min, int z_max,
                            std::optional<double> delta_override) {
  if (z_min < 0 || z_max < 0 || z_min + z_max < 1)
    throw input_error("build_map: need z_min, z_max >= 0 and at least 2 states");
  DiscretizationMap map;
  map.z_min = z_min;
  map.z_max = z_max;
  if (delta_override) {
    map.delta = *delta_override;
    map.validate();
    return map;
  }
  const auto& v = returns.values;
  if (v.size() < 2) throw input_error("build_map: need at least 2 returns");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sigma = std::sqrt(ss / static_cast<double>(v.size() - 1));
  if (!(sigma > 0.0)) throw input_error("build_map: zero variance in returns");
  map.delta = 4.0 * sigma / static_cast<double>(z_min + z_max);
  return map;
}

}  // namespace imc
