#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "doctest.h"

#include "depbandits/environment.hpp"
#include "depbandits/instances.hpp"
#include "support.hpp"

using namespace depbandits;
using testsupport::make_instance;
using testsupport::worked_example;

namespace {

Instance single_type(double p, double l, double eps) {
  return make_instance({1.0}, {{p}}, {{l}}, eps);
}

}  // namespace

TEST_CASE("rng streams are deterministic and decorrelated") {
  RngStream a(123, 0), b(123, 0), c(123, 1), d(124, 0);
  std::uint64_t first = a.next_u64();
  CHECK(first == b.next_u64());
  CHECK(first != c.next_u64());
  CHECK(first != d.next_u64());

  RngStream u(42);
  for (int i = 0; i < 1000; ++i) {
    double x = u.next_uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  RngStream e(7);
  for (int i = 0; i < 100; ++i) CHECK_FALSE(e.bernoulli(0.0));
  for (int i = 0; i < 100; ++i) CHECK(e.bernoulli(1.0));
}

TEST_CASE("episode streams are reproducible") {
  Instance inst = worked_example();
  StreamResult r1 = run_policy_stream(inst, Policy::threshold2(2, 6), 500, 99);
  StreamResult r2 = run_policy_stream(inst, Policy::threshold2(2, 6), 500, 99);
  REQUIRE(r1.episodes.size() == r2.episodes.size());
  for (std::size_t i = 0; i < r1.episodes.size(); ++i) {
    CHECK(r1.episodes[i].clicks == r2.episodes[i].clicks);
    CHECK(r1.episodes[i].length == r2.episodes[i].length);
  }
  std::ostringstream csv1, csv2;
  write_episodes_csv(csv1, r1);
  write_episodes_csv(csv2, r2);
  CHECK(csv1.str() == csv2.str());

  StreamResult r3 = run_policy_stream(inst, Policy::threshold2(2, 6), 500, 100);
  bool any_diff = false;
  for (std::size_t i = 0; i < r1.episodes.size(); ++i)
    any_diff = any_diff || r1.episodes[i].clicks != r3.episodes[i].clicks;
  CHECK(any_diff);
}

TEST_CASE("episodes CSV format") {
  Instance inst = worked_example();
  StreamResult r = run_policy_stream(inst, Policy::fixed(2), 3, 5);
  std::ostringstream os;
  write_episodes_csv(os, r);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "episode,policy_id,return,length");
  std::getline(is, line);
  CHECK(line.rfind("1,0,", 0) == 0);  // episodes numbered from 1
  std::getline(is, line);
  CHECK(line.rfind("2,0,", 0) == 0);
}

TEST_CASE("a vanishing click probability means immediate departure") {
  Instance inst = single_type(1e-9, 1.0, 0.5);
  StreamResult r = run_policy_stream(inst, Policy::fixed(1), 1000, 3);
  for (const auto& ep : r.episodes) {
    CHECK(ep.clicks == 0);
    CHECK(ep.length == 1);  // the final, unclicked recommendation counts
  }
}

TEST_CASE("mean return matches the geometric-series value") {
  SUBCASE("single type, p = 0.5") {
    Instance inst = single_type(0.5, 1.0, 0.5);
    StreamResult r = run_policy_stream(inst, Policy::fixed(1), 100000, 2024);
    double mean = r.total_return() / 100000.0;
    // exact value p/(1-p) = 1, per-episode sd = sqrt(2)
    CHECK(mean == doctest::Approx(1.0).epsilon(3 * std::sqrt(2.0) / std::sqrt(100000.0)));
  }
  SUBCASE("worked example, always the second category") {
    Instance inst = worked_example();
    StreamResult r = run_policy_stream(inst, Policy::fixed(2), 200000, 31);
    double mean = r.total_return() / 200000.0;
    double sq = 0.0;
    for (const auto& ep : r.episodes) {
      double d = static_cast<double>(ep.clicks) - mean;
      sq += d * d;
    }
    double se = std::sqrt(sq / 199999.0 / 200000.0);
    CHECK(std::abs(mean - 0.6502732240437159) < 3 * se);
  }
}

TEST_CASE("length counts every recommendation including the final no-click") {
  RngStream rng(5150);
  for (int trial = 0; trial < 10; ++trial) {
    Instance inst = random_instance_all_departures_one(2, 2, 0.3, rng);
    StreamResult r =
        run_policy_stream(inst, Policy::threshold2(2, trial), 200, trial);
    for (const auto& ep : r.episodes) CHECK(ep.length == ep.clicks + 1);
  }
}

namespace {

// Learner that alternates between two fixed arms and records the
// feedback it receives.
struct AlternatingLearner {
  std::vector<Policy> policies{Policy::fixed(1), Policy::fixed(2)};
  std::vector<int> chosen, observed;
  std::vector<std::int64_t> lengths;
  int next = 0;

  int choose() {
    chosen.push_back(next);
    return std::exchange(next, 1 - next);
  }
  const Policy& policy_for(int id) const {
    return policies[static_cast<std::size_t>(id)];
  }
  void observe(int id, double, std::int64_t length) {
    observed.push_back(id);
    lengths.push_back(length);
  }
};

}  // namespace

TEST_CASE("run_stream hands each episode's feedback to the learner in order") {
  Instance inst = worked_example();
  AlternatingLearner learner;
  StreamResult r = run_stream(inst, learner, 9, 4);
  CHECK((r.policy_ids == std::vector<int>{0, 1, 0, 1, 0, 1, 0, 1, 0}));
  CHECK(learner.chosen == learner.observed);
  REQUIRE(learner.lengths.size() == 9);
  for (std::size_t i = 0; i < 9; ++i)
    CHECK(learner.lengths[i] == r.episodes[i].length);
}

TEST_CASE("run_stream edge cases") {
  Instance inst = worked_example();
  StreamResult r = run_policy_stream(inst, Policy::fixed(1), 1, 0);
  CHECK(r.episodes.size() == 1);
  CHECK_THROWS_AS(run_policy_stream(inst, Policy::fixed(1), 0, 0),
                  std::invalid_argument);
}

TEST_CASE("episodes that outlive the guard raise an error") {
  // With p = 0.98 an episode of more than 5 recommendations happens
  // almost surely within 200 tries.
  Instance inst = single_type(0.98, 1.0, 0.02);
  CHECK_THROWS_AS(run_policy_stream(inst, Policy::fixed(1), 200, 8, 5),
                  std::runtime_error);
}

TEST_CASE("returns follow the geometric law when departures are certain") {
  Instance inst = single_type(0.4, 1.0, 0.5);
  const std::int64_t n = 100000;
  StreamResult r = run_policy_stream(inst, Policy::fixed(1), n, 616);
  std::vector<std::int64_t> counts(40, 0);
  for (const auto& ep : r.episodes)
    if (ep.clicks < 40) ++counts[static_cast<std::size_t>(ep.clicks)];
  // Compare empirical and exact CDFs: P(return = k) = 0.4^k * 0.6.
  double emp_cdf = 0.0, exact_cdf = 0.0, pk = 0.6, worst = 0.0;
  for (int k = 0; k < 40; ++k) {
    emp_cdf += static_cast<double>(counts[static_cast<std::size_t>(k)]) /
               static_cast<double>(n);
    exact_cdf += pk;
    worst = std::max(worst, std::abs(emp_cdf - exact_cdf));
    pk *= 0.4;
  }
  CHECK(worst < 0.01);
}
