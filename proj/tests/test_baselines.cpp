#include "ffl/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "ffl/rng.hpp"

using namespace ffl;

namespace {

// Brute-force krum scoring for 1-D inputs.
std::vector<double> krum_oracle_1d(const std::vector<double>& xs,
                                   std::size_t f, std::size_t m_select) {
  const std::size_t n = xs.size();
  std::vector<double> scores(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> d2;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != k) d2.push_back((xs[k] - xs[j]) * (xs[k] - xs[j]));
    }
    std::sort(d2.begin(), d2.end());
    for (std::size_t t = 0; t < n - f - 2; ++t) scores[k] += d2[t];
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return scores[a] < scores[b]; });
  double sum = 0.0;
  for (std::size_t t = 0; t < m_select; ++t) sum += xs[order[t]];
  return {sum / static_cast<double>(m_select)};
}

std::vector<std::vector<double>> wrap(const std::vector<double>& xs) {
  std::vector<std::vector<double>> out;
  for (const double x : xs) out.push_back({x});
  return out;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("fedavg") {
  CHECK(fedavg(wrap({2, 4}), std::vector<double>{1, 1})[0] ==
        doctest::Approx(3.0));
  CHECK(fedavg(wrap({2, 4}), std::vector<double>{1, 3})[0] ==
        doctest::Approx(3.5));
  CHECK(fedavg(wrap({7}), std::vector<double>{5})[0] == doctest::Approx(7.0));
  CHECK_THROWS_AS(fedavg({}, std::vector<double>{}), std::domain_error);
}

TEST_CASE("coordinate median") {
  CHECK(aggregate_coordinate_median(wrap({1, 2, 9}))[0] == 2.0);
  CHECK(aggregate_coordinate_median(wrap({1, 3}))[0] == 2.0);
}

TEST_CASE("trimmed mean") {
  CHECK(trimmed_mean(wrap({1, 2, 9}), 1.0 / 3.0)[0] == doctest::Approx(2.0));
  CHECK(trimmed_mean(wrap({1, 2, 9}), 0.0)[0] == doctest::Approx(4.0));
  CHECK_THROWS_AS(trimmed_mean(wrap({1, 2}), 0.5), std::domain_error);
  CHECK_THROWS_AS(trimmed_mean(wrap({1, 2}), -0.1), std::domain_error);
}

TEST_CASE("multi-krum oracle example") {
  const std::vector<double> xs{0.0, 0.1, 0.2, 10.0};
  const auto out = multi_krum(wrap(xs), 1, 2);
  CHECK(out[0] == doctest::Approx(0.05));

  // m_select = 1 is plain krum: the most central point.
  const auto krum = multi_krum(wrap(xs), 1, 1);
  CHECK(krum[0] == doctest::Approx(0.1));

  CHECK_THROWS_AS(multi_krum(wrap({1, 2, 3}), 1, 1), std::domain_error);
}

TEST_CASE("multi-krum matches the brute-force oracle on random 1-D sets") {
  DetRng rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + rng.below(6);
    std::vector<double> xs(n);
    for (auto& x : xs) x = rng.uniform(-3.0, 3.0);
    const std::size_t f = 1 + rng.below(std::max<std::size_t>(1, (n - 3) / 2));
    const std::size_t m = 1 + rng.below(n - f - 2);
    const auto got = multi_krum(wrap(xs), f, m);
    const auto want = krum_oracle_1d(xs, f, m);
    CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-12));
  }
}

TEST_CASE("aggregators are permutation-invariant and bounded") {
  DetRng rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xs(7);
    for (auto& x : xs) x = rng.uniform(-5.0, 5.0);
    auto shuffled = xs;
    rng.shuffle(shuffled);

    CHECK(aggregate_coordinate_median(wrap(xs))[0] ==
          doctest::Approx(aggregate_coordinate_median(wrap(shuffled))[0]));
    CHECK(trimmed_mean(wrap(xs), 0.2)[0] ==
          doctest::Approx(trimmed_mean(wrap(shuffled), 0.2)[0]));
    CHECK(multi_krum(wrap(xs), 1, 2)[0] ==
          doctest::Approx(multi_krum(wrap(shuffled), 1, 2)[0]));

    const double lo = *std::min_element(xs.begin(), xs.end());
    const double hi = *std::max_element(xs.begin(), xs.end());
    for (const double v : {aggregate_coordinate_median(wrap(xs))[0],
                           trimmed_mean(wrap(xs), 0.2)[0]}) {
      CHECK(v >= lo);
      CHECK(v <= hi);
    }
  }
}

TEST_CASE("identical updates pass through every aggregator") {
  const std::vector<std::vector<double>> same(6, {1.5, -2.0});
  const std::vector<double> counts(6, 3.0);
  for (const auto& out :
       {fedavg(same, counts), aggregate_coordinate_median(same),
        trimmed_mean(same, 0.2), multi_krum(same, 1, 3)}) {
    CHECK(out[0] == doctest::Approx(1.5));
    CHECK(out[1] == doctest::Approx(-2.0));
  }
}

}  // TEST_SUITE
