#include <doctest.h>

#include <cmath>
#include <numeric>

#include "imc/errors.hpp"
#include "imc/hypothesis.hpp"
#include "paper_matrices.hpp"
#include "test_helpers.hpp"

using namespace imc;

namespace {

NullDistribution from_samples(std::vector<double> samples) {
  NullDistribution d;
  d.samples = std::move(samples);
  return d;
}

}  // namespace

TEST_SUITE_BEGIN("hypothesis");

TEST_CASE("chi-square reference degrees of freedom") {
  CHECK(chi_square_df(5) == 20);
  CHECK(chi_square_df(2) == 2);
  CHECK(chi_square_df(3) == 6);
  CHECK_THROWS_AS(chi_square_df(1), std::invalid_argument);
}

TEST_CASE("p-value formula") {
  const NullDistribution d = from_samples({1.0, 2.0, 3.0});
  CHECK(p_value(d, 2.0) == doctest::Approx(0.75));   // ties count as exceedances
  CHECK(p_value(d, 10.0) == doctest::Approx(0.25));  // 1/(B+1)
  CHECK(p_value(d, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("p-value is non-increasing in the statistic") {
  auto rng = make_stream(5, 0);
  std::vector<double> s(200);
  for (auto& x : s) x = next_double(rng) * 50.0;
  const NullDistribution d = from_samples(std::move(s));
  CHECK(p_value(d, -std::numeric_limits<double>::infinity()) == doctest::Approx(1.0));
  double prev = 2.0;
  for (double t = 0.0; t <= 55.0; t += 0.5) {
    const double p = p_value(d, t);
    CHECK(p <= prev);
    prev = p;
  }
}

TEST_CASE("critical value uses the nearest rank") {
  std::vector<double> s(100);
  std::iota(s.begin(), s.end(), 1.0);  // 1..100
  const NullDistribution d = from_samples(std::move(s));
  CHECK(critical_value(d, 0.05) == doctest::Approx(95.0));
  CHECK(critical_value(d, 0.5) == doctest::Approx(50.0));
  CHECK(critical_value(d, 0.01) == doctest::Approx(99.0));
  CHECK_THROWS_AS(critical_value(d, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(critical_value(d, 1.0), std::invalid_argument);
}

TEST_CASE("single bootstrap replicate is reproducible") {
  const DiscretizationMap map{0.01, 2, 2};
  const Matrix p = test::normalized_rows(test::paper_regime_matrices()[2]);
  IndexSpec spec{map, 10, IndexFunction{}, IndexUnits::normalized};

  // grid from one pilot simulation
  const DiscreteReturnSeries pilot = simulate_markov(p, map, 20'000, 1);
  const IndexSeries V = compute_index(pilot, spec);
  const CandidateGrid grid = candidate_grid(V, 8);

  const NullDistribution a = bootstrap_null(p, spec, 20'000, 1, grid, 99);
  const NullDistribution b = bootstrap_null(p, spec, 20'000, 1, grid, 99);
  REQUIRE(a.samples.size() == 1);
  CHECK(a.samples[0] == b.samples[0]);
  CHECK(a.samples[0] >= 0.0);

  const NullDistribution c = bootstrap_null(p, spec, 20'000, 1, grid, 100);
  CHECK(a.samples[0] != c.samples[0]);
}

TEST_CASE("threading does not change bootstrap results") {
  const DiscretizationMap map{0.01, 2, 2};
  const Matrix p = test::normalized_rows(test::paper_regime_matrices()[1]);
  IndexSpec spec{map, 8, IndexFunction{}, IndexUnits::normalized};
  const DiscreteReturnSeries pilot = simulate_markov(p, map, 10'000, 2);
  const CandidateGrid grid = candidate_grid(compute_index(pilot, spec), 6);

  BootstrapOptions serial;
  serial.threads = 1;
  BootstrapOptions threaded;
  threaded.threads = 4;
  const NullDistribution a = bootstrap_null(p, spec, 10'000, 16, grid, 7, serial);
  const NullDistribution b = bootstrap_null(p, spec, 10'000, 16, grid, 7, threaded);
  CHECK(a.samples == b.samples);
}

TEST_CASE("searched statistic is stochastically larger than the fixed-threshold one") {
  const DiscretizationMap map{0.01, 2, 2};
  const Matrix p = test::normalized_rows(test::paper_regime_matrices()[2]);
  IndexSpec spec{map, 10, IndexFunction{}, IndexUnits::normalized};
  const DiscreteReturnSeries pilot = simulate_markov(p, map, 30'000, 3);
  const IndexSeries V = compute_index(pilot, spec);
  const CandidateGrid grid = candidate_grid(V, 10);

  const std::size_t B = 300;
  BootstrapOptions searched;
  const NullDistribution d_search = bootstrap_null(p, spec, 30'000, B, grid, 11, searched);

  BootstrapOptions fixed;
  fixed.research = false;
  fixed.fixed_thresholds = {grid.points[grid.size() / 2]};
  const NullDistribution d_fixed = bootstrap_null(p, spec, 30'000, B, grid, 11, fixed);

  const double mean_search =
      std::accumulate(d_search.samples.begin(), d_search.samples.end(), 0.0) / B;
  const double mean_fixed =
      std::accumulate(d_fixed.samples.begin(), d_fixed.samples.end(), 0.0) / B;

  // chi^2(20) mean is 20; maximization pushes the searched statistic above it
  CHECK(mean_search > 20.0);
  CHECK(mean_search > mean_fixed);
  CHECK(mean_fixed > 10.0);  // sanity: fixed split stays chi^2-scale
  CHECK(mean_fixed < 35.0);
}

TEST_CASE("near-deterministic null matrix keeps the statistic finite") {
  const DiscretizationMap map{1.0, 1, 1};
  Matrix p(3, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) p(i, j) = 0.005;
    p(i, i) = 0.99;
  }
  IndexSpec spec{map, 4, IndexFunction{}, IndexUnits::normalized};
  CandidateGrid grid;
  grid.points = {0.5};
  const NullDistribution d = bootstrap_null(p, spec, 5'000, 20, grid, 17);
  for (double x : d.samples) {
    CHECK(std::isfinite(x));
    CHECK(x >= 0.0);
  }
}

TEST_CASE("hypothesis_test packages critical values and rejections") {
  std::vector<double> s(1000);
  std::iota(s.begin(), s.end(), 1.0);
  const NullDistribution d = from_samples(std::move(s));
  const std::vector<double> alphas{0.05, 0.01};
  const TestResult r = hypothesis_test(d, 975.0, alphas);
  CHECK(r.d_hat == 975.0);
  REQUIRE(r.critical_values.size() == 2);
  CHECK(r.critical_values[0].second == doctest::Approx(950.0));
  CHECK(r.critical_values[1].second == doctest::Approx(990.0));
  CHECK(r.reject[0].second);        // 975 >= 950
  CHECK_FALSE(r.reject[1].second);  // 975 < 990
  CHECK(r.p == doctest::Approx((1.0 + 26.0) / 1001.0));
}

TEST_CASE("bootstrap validates its inputs") {
  const DiscretizationMap map{1.0, 1, 1};
  Matrix bad(3, 3);
  bad(0, 0) = 0.5;
  IndexSpec spec{map, 4, IndexFunction{}, IndexUnits::normalized};
  CandidateGrid grid;
  grid.points = {0.5};
  CHECK_THROWS_AS(bootstrap_null(bad, spec, 1'000, 5, grid, 1), input_error);

  const Matrix ok = Matrix::uniform(3);
  CHECK_THROWS_AS(bootstrap_null(ok, spec, 1'000, 0, grid, 1), input_error);
  CHECK_THROWS_AS(bootstrap_null(ok, spec, 5, grid.size(), grid, 1), input_error);
}

TEST_SUITE_END();
