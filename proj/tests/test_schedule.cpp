#include <doctest.h>

#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

#include "rrhoc/graph.hpp"
#include "rrhoc/schedule.hpp"

using rrhoc::SamplingSchedule;

namespace {

// Delay bound straight from its definition: max over admissible k of
// t_{k+1} - t_{k-p+1}.
double brute_delay(const std::vector<double>& times, int p) {
  double worst = 0.0;
  for (size_t k = static_cast<size_t>(p) - 1; k + 1 < times.size(); ++k) {
    worst = std::max(worst, times[k + 1] - times[k + 1 - static_cast<size_t>(p)]);
  }
  return worst;
}

} // namespace

TEST_SUITE("schedule") {

TEST_CASE("uniform factory covers the horizon with a minimal grid") {
  const SamplingSchedule s = SamplingSchedule::uniform(0.1, 50.0);
  CHECK(s.is_uniform());
  CHECK(s.step() == doctest::Approx(0.1));
  CHECK(s.count() == 501);
  CHECK(s.horizon() == doctest::Approx(50.0));
  CHECK(s.time_at(0) == 0.0);
  CHECK(s.time_at(3) == doctest::Approx(0.3));

  const SamplingSchedule r = SamplingSchedule::uniform(0.3, 1.0);
  CHECK(r.horizon() >= 1.0);
  CHECK(r.horizon() < 1.0 + 0.3);
}

TEST_CASE("factories reject malformed inputs") {
  CHECK_THROWS_AS(SamplingSchedule::uniform(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SamplingSchedule::uniform(-0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SamplingSchedule::uniform(0.5, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(SamplingSchedule::explicit_times({0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SamplingSchedule::explicit_times({0.1, 0.2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SamplingSchedule::explicit_times({0.0, 0.2, 0.2}),
                  std::invalid_argument);
}

TEST_CASE("non-uniform schedules have no single step") {
  const SamplingSchedule s =
      SamplingSchedule::explicit_times({0.0, 0.1, 0.25, 0.3, 0.45});
  CHECK(!s.is_uniform());
  CHECK_THROWS_AS(s.step(), std::logic_error);
  // Explicit times on an even grid round-trip back to a uniform schedule.
  const SamplingSchedule u =
      SamplingSchedule::explicit_times({0.0, 0.2, 0.4, 0.6});
  CHECK(u.is_uniform());
  CHECK(u.step() == doctest::Approx(0.2));
}

TEST_CASE("worst-case delay on the hand example") {
  // Window gaps t_{k+1} - t_{k-1}: 0.25, 0.2, 0.2 -> the bound is 0.25.
  const SamplingSchedule s =
      SamplingSchedule::explicit_times({0.0, 0.1, 0.25, 0.3, 0.45});
  CHECK(s.node_max_delay(2) == doctest::Approx(0.25));
  CHECK(s.node_max_delay(1) == doctest::Approx(0.15));
  CHECK_THROWS_AS(s.node_max_delay(0), std::invalid_argument);
  CHECK_THROWS_AS(s.node_max_delay(5), std::invalid_argument);
}

TEST_CASE("uniform delay bound is p times the step") {
  const SamplingSchedule s = SamplingSchedule::uniform(0.1, 5.0);
  for (int p = 1; p <= 4; ++p) {
    CHECK(s.node_max_delay(p) == doctest::Approx(0.1 * p));
  }
}

TEST_CASE("random schedules agree with the definitional delay bound") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> gap(0.05, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> times{0.0};
    for (int k = 0; k < 12; ++k) {
      times.push_back(times.back() + gap(rng));
    }
    const SamplingSchedule s = SamplingSchedule::explicit_times(times);
    for (int p = 1; p <= 4; ++p) {
      CHECK(s.node_max_delay(p) == doctest::Approx(brute_delay(times, p)));
    }
  }
}

TEST_CASE("network delay is the widest node window") {
  const rrhoc::DirectedGraph g(3, {{2, 1}, {3, 1}, {1, 2}, {2, 3}});
  const SamplingSchedule s =
      SamplingSchedule::explicit_times({0.0, 0.1, 0.25, 0.3, 0.45});
  double widest = 0.0;
  for (int i = 1; i <= g.node_count(); ++i) {
    if (g.in_degree(i) >= 1) {
      widest = std::max(widest, s.node_max_delay(g.in_degree(i)));
    }
  }
  CHECK(s.network_max_delay(g) == doctest::Approx(widest));
}

TEST_CASE("interval lookup brackets each instant") {
  const SamplingSchedule s =
      SamplingSchedule::explicit_times({0.0, 0.1, 0.25, 0.3});
  CHECK(s.interval_index(-0.5) == -1);
  CHECK(s.interval_index(0.0) == 0);
  CHECK(s.interval_index(0.05) == 0);
  CHECK(s.interval_index(0.1) == 1);
  CHECK(s.interval_index(0.26) == 2);
  CHECK(s.interval_index(0.3) == 3);
  CHECK(s.interval_index(9.0) == 3);
}

} // TEST_SUITE
