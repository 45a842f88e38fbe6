#ifndef DEPBANDITS_ORACLE_HPP
#define DEPBANDITS_ORACLE_HPP

// Reference evaluators used to cross-check the closed-form planners.
//
// Everything here recomputes values from first principles -- simulation,
// running survival products, exhaustive outcome enumeration -- and
// deliberately shares no arithmetic with planning.hpp (which this
// header does not include).  Slow and simple on purpose.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "environment.hpp"
#include "rng.hpp"

namespace depbandits {

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::int64_t episodes = 0;
};

// Simulates `episodes` independent episodes (sub-stream per episode)
// and reports the sample mean return with its standard error.
inline MonteCarloEstimate monte_carlo_value(const Instance& inst,
                                            const Policy& policy,
                                            std::int64_t episodes,
                                            std::uint64_t seed,
                                            std::int64_t max_length = kMaxEpisodeLength) {
  if (episodes < 1)
    throw std::invalid_argument("monte_carlo_value: episodes must be >= 1");
  validate_policy(policy, inst);
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t i = 0; i < episodes; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    double r = static_cast<double>(run_episode(inst, policy, rng, max_length).clicks);
    sum += r;
    sumsq += r * r;
  }
  MonteCarloEstimate est;
  est.episodes = episodes;
  est.mean = sum / static_cast<double>(episodes);
  if (episodes > 1) {
    double n = static_cast<double>(episodes);
    double var = (sumsq - n * est.mean * est.mean) / (n - 1.0);
    est.stderr_mean = std::sqrt(std::max(var, 0.0) / n);
  }
  return est;
}

// Expected return from the first `horizon` recommendations when every
// no-click departs (all L = 1): for each type, the chance of reaching
// iteration i with i clicks is the running product of the clicked
// probabilities, and each survived iteration contributes one click.
inline double brute_force_value(const Instance& inst, const Policy& policy,
                                int horizon) {
  detail::require(inst.all_departures_one(),
                  "brute_force_value: departure probabilities must all be 1");
  detail::require(horizon >= 0, "brute_force_value: horizon must be >= 0");
  validate_policy(policy, inst);
  double total = 0.0;
  for (int x = 1; x <= inst.num_types; ++x) {
    double alive = 1.0, acc = 0.0;
    for (int i = 1; i <= horizon; ++i) {
      alive *= inst.p(policy.at(i), x);
      acc += alive;
    }
    total += inst.q(x) * acc;
  }
  return total;
}

namespace detail {

inline void enumerate_outcomes(const Instance& inst, const Policy& policy,
                               int type, int horizon, int j, double weight,
                               std::int64_t clicks, double& total) {
  if (j > horizon) {
    total += weight * static_cast<double>(clicks);
    return;
  }
  double p = inst.p(policy.at(j), type);
  double l = inst.l(policy.at(j), type);
  enumerate_outcomes(inst, policy, type, horizon, j + 1, weight * p, clicks + 1,
                     total);
  double no_click = weight * (1.0 - p);
  total += no_click * l * static_cast<double>(clicks);  // departs now
  if (l < 1.0)
    enumerate_outcomes(inst, policy, type, horizon, j + 1, no_click * (1.0 - l),
                       clicks, total);
}

}  // namespace detail

inline constexpr int kMaxEnumerationHorizon = 14;

// Exact expected return from the first `horizon` recommendations for
// arbitrary departure probabilities, by enumerating every
// click/stay/depart outcome path.  Exponential in the horizon, so the
// horizon is capped.
inline double brute_force_value_general(const Instance& inst,
                                        const Policy& policy, int horizon) {
  detail::require(horizon >= 0 && horizon <= kMaxEnumerationHorizon,
                  "brute_force_value_general: horizon must be in 0..14");
  validate_policy(policy, inst);
  double total = 0.0;
  for (int x = 1; x <= inst.num_types; ++x) {
    double per_type = 0.0;
    detail::enumerate_outcomes(inst, policy, x, horizon, 1, 1.0, 0, per_type);
    total += inst.q(x) * per_type;
  }
  return total;
}

// Independent exact value of "play `category` for h rounds, then the
// other arm forever" on a 2x2 instance with certain departures:
// running products accumulate the first h terms, then each type's tail
// is a geometric series.
inline double grid_threshold_value(const Instance& inst, int category, int h,
                                   double b) {
  detail::require(inst.num_types == 2 && inst.num_categories == 2,
                  "grid_threshold_value: instance must be 2x2");
  detail::require(inst.all_departures_one(),
                  "grid_threshold_value: departure probabilities must all be 1");
  detail::require(category == 1 || category == 2,
                  "grid_threshold_value: category out of range");
  detail::require(h >= 0, "grid_threshold_value: switch count must be >= 0");
  int other = 3 - category;
  double ux = inst.p(category, 1), uy = inst.p(category, 2);
  double wx = 1.0, wy = 1.0, acc = 0.0;
  for (int i = 0; i < h; ++i) {
    wx *= ux;
    wy *= uy;
    acc += b * wx + (1.0 - b) * wy;
  }
  double tx = inst.p(other, 1), ty = inst.p(other, 2);
  return acc + wx * b * tx / (1.0 - tx) + wy * (1.0 - b) * ty / (1.0 - ty);
}

struct GridSearchResult {
  Policy policy;
  int category = 1;       // arm played before the switch
  int switch_count = 0;   // h; 0 means the other arm is played throughout
  double value = 0.0;
};

// Exhaustive search over both threshold families up to switch count
// h_max, evaluated from the instance prior.  Candidates are scanned in
// increasing switch count with "play 2 first" before "play 1 first",
// so ties resolve to the smallest switch count and then to pi^1.
//
// A candidate only replaces the incumbent when it improves by more
// than a few ulps: value(category, h) converges to the fixed arm
// `category` as h grows, and the two summation orders can disagree by
// one ulp on that plateau, which a strict comparison would misread as
// a genuine interior maximum at some large h.
inline GridSearchResult grid_search_threshold(const Instance& inst, int h_max) {
  detail::require(h_max >= 0, "grid_search_threshold: h_max must be >= 0");
  double b = inst.q(1);
  GridSearchResult best;
  bool first = true;
  for (int h = 0; h <= h_max; ++h) {
    for (int category : {2, 1}) {
      double v = grid_threshold_value(inst, category, h, b);
      double plateau = 64.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(best.value));
      if (first || v > best.value + plateau) {
        best = {Policy::threshold2(category, h).canonical(), category, h, v};
        first = false;
      }
    }
  }
  return best;
}

}  // namespace depbandits

#endif  // DEPBANDITS_ORACLE_HPP
