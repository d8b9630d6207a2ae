#include <doctest.h>

#include <cmath>

#include "imc/errors.hpp"
#include "imc/estimation.hpp"
#include "imc/rng.hpp"
#include "test_helpers.hpp"

using namespace imc;

namespace {

// Uniform random states over the grid plus the aligned index series.
std::pair<DiscreteReturnSeries, IndexSeries> random_series(std::uint64_t seed, std::size_t len,
                                                           int memory,
                                                           DiscretizationMap map = {0.01, 2, 2}) {
  auto rng = make_stream(seed, 0);
  DiscreteReturnSeries J;
  J.map = map;
  J.states.resize(len);
  const int n = map.num_states();
  for (auto& s : J.states)
    s = map.state_at(static_cast<std::size_t>(next_double(rng) * static_cast<double>(n)));
  IndexSeries V = compute_index(J, memory, IndexFunction{});
  return {std::move(J), std::move(V)};
}

}  // namespace

TEST_SUITE_BEGIN("estimation");

TEST_CASE("interval_of implements right-closed intervals") {
  const Partition p{{0.5, 1.5}};
  CHECK(p.intervals() == 3);
  CHECK(p.interval_of(0.0) == 0);
  CHECK(p.interval_of(0.5) == 0);   // right-closed at the threshold
  CHECK(p.interval_of(0.50001) == 1);
  CHECK(p.interval_of(1.5) == 1);
  CHECK(p.interval_of(99.0) == 2);
}

TEST_CASE("partition validation") {
  CHECK_THROWS_AS((Partition{{1.0, 1.0}}.validate()), input_error);
  CHECK_THROWS_AS((Partition{{2.0, 1.0}}.validate()), input_error);
  CHECK_NOTHROW(Partition{}.validate());
}

TEST_CASE("single transition lands in the source-time interval") {
  DiscreteReturnSeries J{{1, -1}, {1.0, 1, 1}};
  IndexSeries V = compute_index(J, 1, IndexFunction{});
  // V_0 = f(1) = 1; threshold above it puts the transition in interval 0.
  const CountTensor c = count_transitions(J, V, Partition{{2.0}});
  CHECK(c.total() == 1);
  CHECK(c.per_interval[0](J.map.index_of(1), J.map.index_of(-1)) == 1);
  CHECK(c.per_interval[1].total() == 0);
}

TEST_CASE("null partition reproduces plain Markov counts") {
  auto [J, V] = random_series(3, 5'000, 4);
  const CountTensor c = count_transitions(J, V, Partition{});
  REQUIRE(c.per_interval.size() == 1);
  // plain tally over the same transition range
  Counts expect(5, 5);
  for (std::size_t n = 4; n < J.size(); ++n)
    expect(J.map.index_of(J.states[n - 1]), J.map.index_of(J.states[n])) += 1;
  CHECK(c.per_interval[0] == expect);
  CHECK(c.total() == static_cast<std::int64_t>(J.size()) - 4);
}

TEST_CASE("six-step hand tally") {
  // states {-1,0,1}, m = 2, f = square: V = (J_t^2 + J_{t-1}^2)/2
  DiscreteReturnSeries J{{1, 0, 0, -1, 1, 0, 0}, {1.0, 1, 1}};
  IndexSeries V = compute_index(J, 2, IndexFunction{});
  // V = [0.5, 0, 0.5, 1, 0.5, 0]; threshold 0.25
  const CountTensor c = count_transitions(J, V, Partition{{0.25}});
  CHECK(c.total() == 5);

  const auto idx = [&](int s) { return J.map.index_of(s); };
  CHECK(c.per_interval[0](idx(0), idx(-1)) == 1);
  CHECK(c.per_interval[0].total() == 1);
  CHECK(c.per_interval[1](idx(0), idx(0)) == 2);
  CHECK(c.per_interval[1](idx(-1), idx(1)) == 1);
  CHECK(c.per_interval[1](idx(1), idx(0)) == 1);
  CHECK(c.per_interval[1].total() == 4);

  const TransitionMatrixSet fit = estimate_matrices(c);
  CHECK(fit.matrices[0](idx(0), idx(-1)) == doctest::Approx(1.0));
  CHECK(fit.unobserved(0, idx(-1)));
  CHECK(fit.unobserved(0, idx(1)));
  CHECK(!fit.unobserved(0, idx(0)));
  CHECK(fit.matrices[0](idx(1), idx(0)) == doctest::Approx(1.0 / 3.0));  // uniform fallback
  CHECK(fit.matrices[1](idx(0), idx(0)) == doctest::Approx(1.0));
  CHECK(fit.row_exposure[1][idx(0)] == 2);
}

TEST_CASE("estimate_matrices divides by row exposure") {
  CountTensor c;
  c.num_states = 3;
  c.per_interval.assign(1, Counts(3, 3));
  c.per_interval[0](0, 0) = 2;
  c.per_interval[0](0, 1) = 2;
  const TransitionMatrixSet fit = estimate_matrices(c);
  CHECK(fit.matrices[0](0, 0) == doctest::Approx(0.5));
  CHECK(fit.matrices[0](0, 1) == doctest::Approx(0.5));
  CHECK(fit.matrices[0](0, 2) == doctest::Approx(0.0));
  // unobserved rows flagged and uniform
  CHECK(fit.unobserved(0, 1));
  CHECK(fit.matrices[0](1, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("log-likelihood of deterministic rows is zero") {
  Counts c(2, 2);
  c(0, 1) = 7;
  c(1, 0) = 6;
  CHECK(log_likelihood(c) == 0.0);
}

TEST_CASE("log-likelihood of an even two-way split") {
  Counts c(2, 2);
  c(0, 0) = 1;
  c(0, 1) = 1;
  CHECK(log_likelihood(c) == doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-15));
  CHECK(log_likelihood(c) == doctest::Approx(-1.3862943611198906).epsilon(1e-15));
}

TEST_CASE("zero-count cells contribute exactly zero") {
  Counts empty(4, 4);
  CHECK(log_likelihood(empty) == 0.0);
}

TEST_CASE("log-likelihood is never positive") {
  auto rng = make_stream(8, 0);
  for (int rep = 0; rep < 20; ++rep) {
    Counts c(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        c(i, j) = static_cast<std::int64_t>(next_double(rng) * 10.0);
    CHECK(log_likelihood(c) <= 0.0);
  }
}

TEST_CASE("refining a partition never lowers the log-likelihood") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    auto [J, V] = random_series(seed, 20'000, 5);
    const double l0 = log_likelihood(count_transitions(J, V, Partition{}));
    const double l1 = log_likelihood(count_transitions(J, V, Partition{{1.0}}));
    const double l2 = log_likelihood(count_transitions(J, V, Partition{{1.0, 2.0}}));
    const double l3 = log_likelihood(count_transitions(J, V, Partition{{0.5, 1.0, 2.0}}));
    CHECK(l1 >= l0 - 1e-9);
    CHECK(l2 >= l1 - 1e-9);
    CHECK(l3 >= l2 - 1e-9);
  }
}

TEST_CASE("merging interval counts reproduces the coarse matrix exactly") {
  auto [J, V] = random_series(11, 30'000, 6);
  const CountTensor fine = count_transitions(J, V, Partition{{0.8, 1.6}});
  const CountTensor coarse = count_transitions(J, V, Partition{{1.6}});

  Counts merged = fine.per_interval[0];
  merged.add(fine.per_interval[1]);
  CHECK(merged == coarse.per_interval[0]);

  CountTensor merged_tensor;
  merged_tensor.num_states = fine.num_states;
  merged_tensor.per_interval = {merged, fine.per_interval[2]};
  const TransitionMatrixSet a = estimate_matrices(merged_tensor);
  const TransitionMatrixSet b = estimate_matrices(coarse);
  CHECK(a.matrices[0] == b.matrices[0]);
  CHECK(a.matrices[1] == b.matrices[1]);
}

TEST_CASE("estimated rows with exposure sum to one") {
  auto [J, V] = random_series(13, 10'000, 3);
  const TransitionMatrixSet fit = estimate_matrices(count_transitions(J, V, Partition{{1.2}}));
  for (std::size_t r = 0; r < fit.size(); ++r)
    for (std::size_t i = 0; i < 5; ++i)
      if (!fit.unobserved(r, i))
        CHECK(std::abs(fit.matrices[r].row_sum(i) - 1.0) < 1e-12);
}

TEST_CASE("count log-likelihood agrees with the trajectory sum") {
  auto [J, V] = random_series(17, 20'000, 4);
  const Partition partition{{0.7, 1.5}};
  const CountTensor counts = count_transitions(J, V, partition);
  const RegimeModel model = fit_regime_model(J, V, partition);

  double traj = 0.0;
  for (std::size_t n = 4; n < J.size(); ++n) {
    const std::size_t r = partition.interval_of(V.at(n - 1));
    traj += std::log(
        model.matrices.matrices[r](J.map.index_of(J.states[n - 1]), J.map.index_of(J.states[n])));
  }
  CHECK(log_likelihood(counts) == doctest::Approx(traj).epsilon(1e-9));
}

TEST_CASE("misaligned index series is rejected") {
  auto [J, V] = random_series(19, 1'000, 4);
  V.values.pop_back();
  CHECK_THROWS_AS(count_transitions(J, V, Partition{}), input_error);
}

TEST_SUITE_END();
