#include "imc/first_passage.hpp"

#include <cmath>

#include "imc/errors.hpp"
#include "imc/parallel.hpp"
#include "imc/rng.hpp"

namespace imc {

namespace {

constexpr std::size_t kMaxWindowStates = 1'000'000;

void check_window(const WindowState& window, const RegimeModel& model) {
  if (window.memory() != static_cast<std::size_t>(model.spec.memory))
    throw input_error("window must hold exactly m states");
  for (int s : window.states)
    if (s < -model.spec.map.z_min || s > model.spec.map.z_max)
      throw input_error("window state outside the grid");
}

}  // namespace

TargetInterval TargetInterval::regime(const RegimeModel& model, std::size_t regime_index) {
  const std::size_t k = model.partition.thresholds.size();
  if (regime_index > k) throw input_error("target regime index out of range");
  TargetInterval t;
  if (regime_index > 0) t.lo = model.partition.thresholds[regime_index - 1];
  if (regime_index < k) t.hi = model.partition.thresholds[regime_index];
  return t;
}

std::vector<int> reachable_set(const WindowState& window, const RegimeModel& model,
                               const TargetInterval& target) {
  model.spec.map.validate();
  check_window(window, model);
  const std::vector<double> fv = state_values(model.spec.map, model.spec.f, model.spec.units);
  const double m = static_cast<double>(model.spec.memory);

  double sum = 0.0;
  for (int s : window.states) sum += fv[model.spec.map.index_of(s)];
  const double oldest = fv[model.spec.map.index_of(window.states.front())];

  std::vector<int> out;
  for (int s = -model.spec.map.z_min; s <= model.spec.map.z_max; ++s) {
    const double next_v = (sum - oldest + fv[model.spec.map.index_of(s)]) / m;
    if (target.contains(next_v)) out.push_back(s);
  }
  return out;
}

FirstPassageDistribution first_passage_exact(const RegimeModel& model, const WindowState& window,
                                             const TargetInterval& target, std::size_t horizon) {
  model.validate();
  check_window(window, model);
  if (horizon < 1) throw input_error("horizon must be at least 1");

  const std::size_t s_count = model.num_states();
  const std::size_t m = static_cast<std::size_t>(model.spec.memory);

  std::size_t total = 1;
  for (std::size_t i = 0; i < m; ++i) {
    if (total > kMaxWindowStates / s_count)
      throw input_error("window state space |E|^m exceeds the exact-computation guard; "
                        "use the Monte Carlo estimator");
    total *= s_count;
  }

  if (s_count > 32) throw input_error("exact first passage supports at most 32 states");

  const std::vector<double> fv = state_values(model.spec.map, model.spec.f, model.spec.units);
  const double dm = static_cast<double>(m);
  const std::size_t high = total / s_count;  // place value of the oldest digit

  // Window encoding: digit 0 (least significant) is the newest state index,
  // digit m-1 the oldest. Appending j maps w -> (w % high) * |E| + j.
  std::vector<std::uint32_t> row_offset(total);
  std::vector<std::uint32_t> enter_mask(total);  // bit j: appending j enters the target
  for (std::size_t w = 0; w < total; ++w) {
    double sum = 0.0;
    std::size_t x = w;
    for (std::size_t d = 0; d < m; ++d) {
      sum += fv[x % s_count];
      x /= s_count;
    }
    const std::size_t regime = model.partition.interval_of(sum / dm);
    const std::size_t last = w % s_count;
    row_offset[w] = static_cast<std::uint32_t>((regime * s_count + last) * s_count);

    const double oldest = fv[w / high];
    std::uint32_t mask = 0;
    for (std::size_t j = 0; j < s_count; ++j)
      if (target.contains((sum - oldest + fv[j]) / dm)) mask |= (1u << j);
    enter_mask[w] = mask;
  }

  // Flatten the regime matrices for offset addressing.
  std::vector<double> rows;
  rows.reserve(model.matrices.size() * s_count * s_count);
  for (const auto& p : model.matrices.matrices)
    rows.insert(rows.end(), p.data().begin(), p.data().end());

  std::size_t w0 = 0;
  {
    std::size_t place = 1;
    for (std::size_t t = 0; t < m; ++t) {  // digit t is states[m-1-t]
      w0 += model.spec.map.index_of(window.states[m - 1 - t]) * place;
      place *= s_count;
    }
  }

  FirstPassageDistribution out;
  out.target = target;
  out.horizon = horizon;
  out.method = "exact";
  out.g.reserve(horizon);

  std::vector<double> prev(total), cur(total);
  for (std::size_t w = 0; w < total; ++w) {
    const double* row = rows.data() + row_offset[w];
    double p_enter = 0.0;
    const std::uint32_t mask = enter_mask[w];
    for (std::size_t j = 0; j < s_count; ++j)
      if (mask & (1u << j)) p_enter += row[j];
    prev[w] = p_enter;
  }
  out.g.push_back(prev[w0]);

  for (std::size_t n = 2; n <= horizon; ++n) {
    for (std::size_t w = 0; w < total; ++w) {
      const double* row = rows.data() + row_offset[w];
      const std::size_t shifted = (w % high) * s_count;
      const std::uint32_t mask = enter_mask[w];
      double acc = 0.0;
      for (std::size_t j = 0; j < s_count; ++j)
        if (!(mask & (1u << j))) acc += row[j] * prev[shifted + j];
      cur[w] = acc;
    }
    std::swap(prev, cur);
    out.g.push_back(prev[w0]);
  }

  double mass = 0.0;
  for (double p : out.g) mass += p;
  out.tail_mass = std::max(0.0, 1.0 - mass);
  return out;
}

FirstPassageDistribution first_passage_mc(const RegimeModel& model, const WindowState& window,
                                          const TargetInterval& target, std::size_t horizon,
                                          std::size_t replicates, std::uint64_t seed,
                                          int threads) {
  model.validate();
  check_window(window, model);
  if (horizon < 1) throw input_error("horizon must be at least 1");
  if (replicates < 1) throw input_error("need at least one replicate");

  const std::size_t m = static_cast<std::size_t>(model.spec.memory);
  const std::vector<double> fv = state_values(model.spec.map, model.spec.f, model.spec.units);
  const double dm = static_cast<double>(m);

  // hit_step[b] = first entering step, or 0 when censored at the horizon.
  std::vector<std::uint32_t> hit_step(replicates, 0);
  parallel_for(replicates, threads, [&](std::size_t b) {
    auto rng = make_stream(seed, b + 1);
    std::vector<std::size_t> ring(m);
    double sum = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
      ring[t] = model.spec.map.index_of(window.states[t]);
      sum += fv[ring[t]];
    }
    std::size_t pos = 0;  // oldest element of the ring
    std::size_t cur = ring[(pos + m - 1) % m];
    for (std::size_t n = 1; n <= horizon; ++n) {
      const double v = sum / dm;
      const std::size_t regime = model.partition.interval_of(v);
      const std::size_t next = sample_index(rng, model.matrices.matrices[regime].row(cur));
      sum += fv[next] - fv[ring[pos]];
      ring[pos] = next;
      pos = (pos + 1) % m;
      cur = next;
      if (target.contains(sum / dm)) {
        hit_step[b] = static_cast<std::uint32_t>(n);
        break;
      }
    }
  });

  FirstPassageDistribution out;
  out.target = target;
  out.horizon = horizon;
  out.method = "monte-carlo";
  out.g.assign(horizon, 0.0);
  std::size_t censored = 0;
  for (std::uint32_t h : hit_step) {
    if (h == 0)
      ++censored;
    else
      out.g[h - 1] += 1.0;
  }
  const double r = static_cast<double>(replicates);
  out.std_error.reserve(horizon);
  for (double& p : out.g) {
    p /= r;
    out.std_error.push_back(std::sqrt(p * (1.0 - p) / r));
  }
  out.tail_mass = static_cast<double>(censored) / r;
  return out;
}

}  // namespace imc
