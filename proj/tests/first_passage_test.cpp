#include <doctest.h>

#include <cmath>
#include <numeric>

#include "imc/errors.hpp"
#include "imc/first_passage.hpp"
#include "test_helpers.hpp"

using namespace imc;

namespace {

// Exhaustive path enumeration, recomputing the index from the full window at
// every node. Kept deliberately independent of the dynamic program.
void enumerate_paths(const RegimeModel& model, const TargetInterval& target,
                     std::vector<int>& window, double prob, std::size_t step,
                     std::size_t horizon, std::vector<double>& g) {
  const std::size_t m = window.size();
  double sum = 0.0;
  for (int s : window) sum += model.spec.f.value(s, model.spec.map, model.spec.units);
  const double v = sum / static_cast<double>(m);
  const std::size_t regime = model.partition.interval_of(v);
  const auto row = model.matrices.matrices[regime].row(model.spec.map.index_of(window.back()));

  for (int j = -model.spec.map.z_min; j <= model.spec.map.z_max; ++j) {
    const double pj = row[model.spec.map.index_of(j)];
    if (pj == 0.0) continue;
    std::vector<int> next(window.begin() + 1, window.end());
    next.push_back(j);
    double nsum = 0.0;
    for (int s : next) nsum += model.spec.f.value(s, model.spec.map, model.spec.units);
    if (target.contains(nsum / static_cast<double>(m))) {
      g[step] += prob * pj;
    } else if (step + 1 < horizon) {
      enumerate_paths(model, target, next, prob * pj, step + 1, horizon, g);
    }
  }
}

std::vector<double> brute_force_g(const RegimeModel& model, const WindowState& window,
                                  const TargetInterval& target, std::size_t horizon) {
  std::vector<double> g(horizon, 0.0);
  std::vector<int> w = window.states;
  enumerate_paths(model, target, w, 1.0, 0, horizon, g);
  return g;
}

RegimeModel random_model(std::uint64_t seed, DiscretizationMap map, int memory,
                         std::size_t regimes) {
  auto rng = make_stream(seed, 0);
  RegimeModel model;
  model.spec.map = map;
  model.spec.memory = memory;
  const IndexBounds b = model.bounds();
  std::vector<double> psis;
  for (std::size_t r = 0; r + 1 < regimes; ++r)
    psis.push_back(b.lower + (b.upper - b.lower) * next_double(rng));
  std::sort(psis.begin(), psis.end());
  psis.erase(std::unique(psis.begin(), psis.end()), psis.end());
  model.partition.thresholds = psis;
  const std::size_t n = static_cast<std::size_t>(map.num_states());
  for (std::size_t r = 0; r <= psis.size(); ++r)
    model.matrices.matrices.push_back(test::random_stochastic(rng, n));
  model.matrices.row_exposure.assign(model.matrices.size(), std::vector<std::int64_t>(n, 0));
  return model;
}

WindowState random_window(std::uint64_t seed, const DiscretizationMap& map, int memory) {
  auto rng = make_stream(seed, 1);
  WindowState w;
  for (int t = 0; t < memory; ++t)
    w.states.push_back(map.state_at(
        static_cast<std::size_t>(next_double(rng) * static_cast<double>(map.num_states()))));
  return w;
}

}  // namespace

TEST_SUITE_BEGIN("first_passage");

TEST_CASE("reachable set for memory one and a squared index") {
  RegimeModel model = random_model(1, {0.5, 2, 2}, 1, 1);
  model.spec.units = IndexUnits::raw;
  TargetInterval target;
  target.lo = 0.25;  // delta^2
  target.include_lo = true;
  const WindowState w{{0}};
  const std::vector<int> r = reachable_set(w, model, target);
  CHECK(r == std::vector<int>{-2, -1, 1, 2});  // every state with |i| >= 1
}

TEST_CASE("full-range target is reachable by every state") {
  const RegimeModel model = random_model(2, {1.0, 1, 1}, 3, 2);
  const WindowState w{{0, 1, -1}};
  const TargetInterval all;  // (-inf, inf)
  CHECK(reachable_set(w, model, all) == std::vector<int>{-1, 0, 1});

  const FirstPassageDistribution d = first_passage_exact(model, w, all, 5);
  CHECK(d.g[0] == doctest::Approx(1.0));
  for (std::size_t n = 1; n < 5; ++n) CHECK(d.g[n] == doctest::Approx(0.0));
  CHECK(d.tail_mass == doctest::Approx(0.0));
}

TEST_CASE("unattainable target is reachable by no state") {
  const RegimeModel model = random_model(3, {1.0, 1, 1}, 2, 1);
  TargetInterval target;
  target.lo = 50.0;  // above the index upper bound
  const WindowState w{{0, 0}};
  CHECK(reachable_set(w, model, target).empty());
}

TEST_CASE("one-step probability sums the reachable row entries") {
  const DiscretizationMap map{1.0, 1, 1};
  const RegimeModel model = random_model(4, map, 2, 2);
  const WindowState w{{1, 0}};
  TargetInterval target;
  target.lo = 0.4;
  const std::vector<int> reach = reachable_set(w, model, target);

  double sum = 0.0;
  const double v = (model.spec.f.value(1, map, model.spec.units) +
                    model.spec.f.value(0, map, model.spec.units)) /
                   2.0;
  const auto row = model.matrices.matrices[model.partition.interval_of(v)].row(map.index_of(0));
  for (int s : reach) sum += row[map.index_of(s)];

  const FirstPassageDistribution d = first_passage_exact(model, w, target, 1);
  CHECK(d.g[0] == doctest::Approx(sum).epsilon(1e-14));
}

TEST_CASE("exact distribution equals brute-force enumeration") {
  int instances = 0;
  for (std::uint64_t seed = 10; seed < 22; ++seed) {
    const DiscretizationMap map = (seed % 2 == 0) ? DiscretizationMap{1.0, 1, 1}
                                                  : DiscretizationMap{1.0, 0, 1};
    const int memory = 1 + static_cast<int>(seed % 3);
    const RegimeModel model = random_model(seed, map, memory, 2 + seed % 2);
    const WindowState w = random_window(seed, map, memory);

    auto rng = make_stream(seed, 2);
    const std::size_t regime = static_cast<std::size_t>(
        next_double(rng) * static_cast<double>(model.partition.intervals()));
    const TargetInterval target = TargetInterval::regime(model, regime);

    const std::size_t horizon = 6;
    const FirstPassageDistribution d = first_passage_exact(model, w, target, horizon);
    const std::vector<double> oracle = brute_force_g(model, w, target, horizon);
    for (std::size_t n = 0; n < horizon; ++n)
      CHECK(d.g[n] == doctest::Approx(oracle[n]).epsilon(1e-12));
    ++instances;
  }
  CHECK(instances == 12);
}

TEST_CASE("cumulative mass is monotone in the horizon and bounded by one") {
  const DiscretizationMap map{1.0, 1, 1};
  const RegimeModel model = random_model(30, map, 2, 3);
  const WindowState w{{0, 0}};
  const TargetInterval target = TargetInterval::regime(model, model.partition.intervals() - 1);

  const FirstPassageDistribution d = first_passage_exact(model, w, target, 40);
  double acc = 0.0;
  for (double p : d.g) {
    CHECK(p >= 0.0);
    acc += p;
    CHECK(acc <= 1.0 + 1e-12);
  }
  CHECK(d.tail_mass == doctest::Approx(1.0 - acc).epsilon(1e-9));

  // shorter horizons are prefixes of longer ones
  const FirstPassageDistribution d5 = first_passage_exact(model, w, target, 5);
  for (std::size_t n = 0; n < 5; ++n) CHECK(d5.g[n] == doctest::Approx(d.g[n]).epsilon(1e-14));
}

TEST_CASE("monte carlo agrees with exact within three standard errors") {
  const DiscretizationMap map{1.0, 1, 1};
  const RegimeModel model = random_model(50, map, 2, 2);
  const WindowState w{{0, 1}};
  const TargetInterval target = TargetInterval::regime(model, 1);
  const std::size_t horizon = 8;

  const FirstPassageDistribution exact = first_passage_exact(model, w, target, horizon);
  const FirstPassageDistribution mc = first_passage_mc(model, w, target, horizon, 100'000, 7);
  REQUIRE(mc.g.size() == horizon);
  for (std::size_t n = 0; n < horizon; ++n) {
    const double se = std::max(mc.std_error[n], 1e-6);
    CHECK(std::abs(mc.g[n] - exact.g[n]) < 3.0 * se + 1e-9);
  }
}

TEST_CASE("monte carlo error shrinks with the replicate count") {
  const DiscretizationMap map{1.0, 1, 1};
  const RegimeModel model = random_model(60, map, 2, 2);
  const WindowState w{{0, 0}};
  const TargetInterval target = TargetInterval::regime(model, 1);
  const std::size_t horizon = 10;
  const FirstPassageDistribution exact = first_passage_exact(model, w, target, horizon);

  auto total_error = [&](std::size_t replicates) {
    const FirstPassageDistribution mc =
        first_passage_mc(model, w, target, horizon, replicates, 31);
    double err = 0.0;
    for (std::size_t n = 0; n < horizon; ++n) err += std::abs(mc.g[n] - exact.g[n]);
    return err;
  };
  const double e3 = total_error(1'000);
  const double e4 = total_error(10'000);
  const double e5 = total_error(100'000);
  CHECK(e4 < e3);
  CHECK(e5 < e4);
}

TEST_CASE("window-state explosion is guarded") {
  const DiscretizationMap map{0.01, 2, 2};
  const RegimeModel model = random_model(70, map, 10, 2);  // 5^10 windows
  const WindowState w{std::vector<int>(10, 0)};
  CHECK_THROWS_WITH_AS(first_passage_exact(model, w, TargetInterval{}, 5),
                       doctest::Contains("Monte Carlo"), input_error);
}

TEST_CASE("window must match the model memory") {
  const DiscretizationMap map{1.0, 1, 1};
  const RegimeModel model = random_model(80, map, 3, 1);
  CHECK_THROWS_AS(first_passage_exact(model, WindowState{{0}}, TargetInterval{}, 3), input_error);
  CHECK_THROWS_AS((reachable_set(WindowState{{0, 9, 0}}, model, TargetInterval{})), input_error);
}

TEST_SUITE_END();
