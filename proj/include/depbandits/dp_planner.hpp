#ifndef DEPBANDITS_DP_PLANNER_HPP
#define DEPBANDITS_DP_PLANNER_HPP

// Finite-horizon planner for two categories and any number of types,
// departures all 1.
//
// Order within a recommendation sequence only matters through the
// counts: after recommending category 1 c1 times and category 2 c2
// times, the chance a user is still present is
//
//   alpha(c1, c2) = sum_tau w_tau P(1,tau)^c1 P(2,tau)^c2,
//
// and that is also the expected reward of the (c1 + c2)-th
// recommendation.  Hence the best expected return over all length-H
// sequences satisfies
//
//   D(h, c1) = max(D(h-1, c1-1), D(h-1, c1)) + alpha(c1, h - c1),
//
// with D(0, 0) = 0, evaluated over the triangle of H(H+3)/2 cells.
// Values use rolling rows; one packed choice bit per cell recovers an
// optimal sequence.  Ties prefer recommending category 1.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "core.hpp"

namespace depbandits {

struct DpPlan {
  std::vector<int> actions;  // optimal categories, iterations 1..H
  double value = 0.0;        // expected return of that sequence
  std::int64_t cells = 0;    // dynamic-programming cells evaluated
};

namespace detail {

struct DpRun {
  DpPlan plan;
  std::vector<double> curve;  // best value per horizon 1..H
};

inline DpRun dp_run(const Instance& inst, int horizon,
                    std::optional<double> belief_override) {
  require(inst.num_categories == 2, "dp_plan: instance must have two categories");
  require(inst.all_departures_one(),
          "dp_plan: departure probabilities must all be 1");
  require(horizon >= 1, "dp_plan: horizon must be >= 1");

  int M = inst.num_types;
  std::vector<double> weights(inst.prior);
  if (belief_override) {
    require(M == 2, "dp_plan: belief override requires two types");
    require(*belief_override >= 0.0 && *belief_override <= 1.0,
            "dp_plan: belief override must lie in [0, 1]");
    weights = {*belief_override, 1.0 - *belief_override};
  }

  // pow1[tau][c] = P(1,tau)^c, likewise pow2; built incrementally.
  std::vector<std::vector<double>> pow1(M), pow2(M);
  for (int t = 0; t < M; ++t) {
    pow1[t].resize(static_cast<std::size_t>(horizon) + 1);
    pow2[t].resize(static_cast<std::size_t>(horizon) + 1);
    pow1[t][0] = pow2[t][0] = 1.0;
    for (int c = 1; c <= horizon; ++c) {
      pow1[t][c] = pow1[t][c - 1] * inst.click[0][t];
      pow2[t][c] = pow2[t][c - 1] * inst.click[1][t];
    }
  }
  auto alpha = [&](int c1, int c2) {
    double s = 0.0;
    for (int t = 0; t < M; ++t) s += weights[t] * pow1[t][c1] * pow2[t][c2];
    return s;
  };

  DpRun run;
  run.curve.reserve(static_cast<std::size_t>(horizon));
  std::vector<std::vector<bool>> took1(static_cast<std::size_t>(horizon) + 1);
  std::vector<double> prev{0.0};  // level 0
  for (int h = 1; h <= horizon; ++h) {
    std::vector<double> cur(static_cast<std::size_t>(h) + 1);
    took1[h].resize(static_cast<std::size_t>(h) + 1);
    for (int c1 = 0; c1 <= h; ++c1) {
      bool can1 = c1 >= 1, can2 = c1 <= h - 1;
      bool take1 = can1 && (!can2 || prev[c1 - 1] >= prev[c1]);
      double parent = take1 ? prev[c1 - 1] : prev[c1];
      cur[c1] = parent + alpha(c1, h - c1);
      took1[h][c1] = take1;
      ++run.plan.cells;
    }
    double level_best = cur[h];
    for (int c1 = h - 1; c1 >= 0; --c1)
      if (cur[c1] > level_best) level_best = cur[c1];
    run.curve.push_back(level_best);
    prev = std::move(cur);
  }

  int best_c1 = horizon;
  for (int c1 = horizon - 1; c1 >= 0; --c1)
    if (prev[c1] > prev[best_c1]) best_c1 = c1;
  run.plan.value = prev[best_c1];

  run.plan.actions.assign(static_cast<std::size_t>(horizon), 2);
  int c1 = best_c1;
  for (int h = horizon; h >= 1; --h) {
    if (took1[h][c1]) {
      run.plan.actions[static_cast<std::size_t>(h) - 1] = 1;
      --c1;
    }
  }
  return run;
}

}  // namespace detail

inline DpPlan dp_plan(const Instance& inst, int horizon,
                      std::optional<double> belief_override = std::nullopt) {
  return detail::dp_run(inst, horizon, belief_override).plan;
}

// Best expected return over all recommendation sequences of each
// length 1..h_max; non-decreasing in the horizon.
inline std::vector<double> dp_value_curve(const Instance& inst, int h_max,
                                          std::optional<double> belief_override = std::nullopt) {
  return detail::dp_run(inst, h_max, belief_override).curve;
}

}  // namespace depbandits

#endif  // DEPBANDITS_DP_PLANNER_HPP
