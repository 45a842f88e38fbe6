#ifndef DEPBANDITS_PLANNING_HPP
#define DEPBANDITS_PLANNING_HPP

// Exact planning.
//
// Single-type instances (M = 1): each arm's expected return is the
// geometric-series value P / (L (1 - P)), so the optimal policy is the
// fixed arm maximizing that ratio.
//
// Two types, two categories, departure probabilities all 1: the
// posterior probability b of the first type evolves deterministically
// given the recommendations (clicks carry no extra information about
// the type beyond survival, so the walk over (belief, category) pairs
// is fixed by the policy).  The expected return of a policy is
//
//   sum_{i>=1} b * P(1,x)^{m1,i} P(2,x)^{m2,i}
//            + (1-b) * P(1,y)^{m1,i} P(2,y)^{m2,i},
//
// where m_{a,i} counts recommendations of category a among the first i.
// For a threshold policy that plays category 2 for N rounds and then
// category 1 forever this sum has the closed form
//
//   f(N) = c1 * P(2,x)^N + c2 * P(2,y)^N + c3,
//
// and f has a single interior stationary point
//
//   N~ = ln( -c2 ln P(2,y) / (c1 ln P(2,x)) ) / ln( P(2,x) / P(2,y) ).
//
// In normal form (largest click probability at category 1, type x) the
// optimal policy is:
//   dominant-row:       pi^1;
//   dominant-column:    the best of pi^1, pi^2 and the thresholds
//                       (2, floor N*), (2, ceil N*) with N* = max(0, N~);
//   dominant-diagonal:  the better fixed arm, pi^1 or pi^2.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "core.hpp"

namespace depbandits {

inline constexpr std::int64_t kSaddleCap = 1'000'000;

struct ArmValue {
  int category = 1;
  double value = 0.0;
};

// Optimal fixed arm for a single-type instance (any departure
// probabilities).  Ties resolve to the smallest category label.
inline ArmValue single_type_optimal_arm(const Instance& inst) {
  detail::require(inst.num_types == 1,
                  "single_type_optimal_arm: instance must have one type");
  ArmValue best{1, 0.0};
  bool first = true;
  for (int a = 1; a <= inst.num_categories; ++a) {
    double p = inst.p(a, 1), l = inst.l(a, 1);
    double v = p / (l * (1.0 - p));
    if (first || v > best.value) {
      best = {a, v};
      first = false;
    }
  }
  return best;
}

inline double single_arm_value(double p, double l) { return p / (l * (1.0 - p)); }

// Posterior update for M = 2 after recommending category a: surviving
// an iteration of category a reweights the two types by their click
// probabilities.
inline double belief_update(const Instance& inst, double b, int a) {
  detail::require(inst.num_types == 2, "belief_update: instance must have two types");
  detail::require(a >= 1 && a <= inst.num_categories,
                  "belief_update: category out of range");
  double num = b * inst.p(a, 1);
  return num / (num + (1.0 - b) * inst.p(a, 2));
}

namespace detail {

inline void require_planning_2x2(const Instance& inst, const char* who) {
  require(inst.num_types == 2 && inst.num_categories == 2,
          std::string(who) + ": instance must be 2x2");
  require(inst.all_departures_one(),
          std::string(who) + ": departure probabilities must all be 1");
}

}  // namespace detail

struct BeliefWalkStep {
  double belief = 0.0;  // before this recommendation
  int category = 0;     // recommendation at this iteration
  int count1 = 0;       // recommendations of category 1 so far, inclusive
  int count2 = 0;
};

// The deterministic (belief, category) walk induced by a policy from
// initial belief b0; valid only when departures are certain, otherwise
// elapsed time itself would carry information and the walk would
// branch.
inline std::vector<BeliefWalkStep> belief_category_walk(const Instance& inst,
                                                        const Policy& policy,
                                                        double b0, int len) {
  detail::require(inst.num_types == 2,
                  "belief_category_walk: instance must have two types");
  detail::require(inst.all_departures_one(),
                  "belief_category_walk: departure probabilities must all be 1");
  validate_policy(policy, inst);
  std::vector<BeliefWalkStep> walk;
  walk.reserve(static_cast<std::size_t>(std::max(len, 0)));
  double b = b0;
  int m1 = 0, m2 = 0;
  for (int i = 1; i <= len; ++i) {
    int a = policy.at(i);
    (a == 1 ? m1 : m2) += 1;
    walk.push_back({b, a, m1, m2});
    b = belief_update(inst, b, a);
  }
  return walk;
}

struct TruncatedReturn {
  double value = 0.0;       // expected return from the first `horizon` iterations
  double tail_bound = 0.0;  // (1 - epsilon)^horizon / epsilon
};

// Truncated evaluation of any policy on a 2x2 all-departures-1
// instance, term by term via the recommendation counts.  The dropped
// tail is at most (1-eps)^H / eps because every per-iteration term is
// a mixture of i-th powers of click probabilities <= 1 - eps.
inline TruncatedReturn expected_return_truncated(const Instance& inst,
                                                 const Policy& policy, double b,
                                                 int horizon) {
  detail::require_planning_2x2(inst, "expected_return_truncated");
  validate_policy(policy, inst);
  detail::require(horizon >= 0, "expected_return_truncated: horizon must be >= 0");
  double p1x = inst.p(1, 1), p1y = inst.p(1, 2);
  double p2x = inst.p(2, 1), p2y = inst.p(2, 2);
  int m1 = 0, m2 = 0;
  double v = 0.0;
  for (int i = 1; i <= horizon; ++i) {
    (policy.at(i) == 1 ? m1 : m2) += 1;
    v += b * std::pow(p1x, m1) * std::pow(p2x, m2) +
         (1.0 - b) * std::pow(p1y, m1) * std::pow(p2y, m2);
  }
  return {v, std::pow(1.0 - inst.epsilon, horizon) / inst.epsilon};
}

// Exact value of the fixed arm a from belief b (geometric series per
// type); works for any number of categories as long as departures are 1.
inline double fixed_arm_value(const Instance& inst, int a, double b) {
  detail::require(inst.num_types == 2, "fixed_arm_value: instance must have two types");
  detail::require(inst.all_departures_one(),
                  "fixed_arm_value: departure probabilities must all be 1");
  detail::require(a >= 1 && a <= inst.num_categories,
                  "fixed_arm_value: category out of range");
  double px = inst.p(a, 1), py = inst.p(a, 2);
  return b * px / (1.0 - px) + (1.0 - b) * py / (1.0 - py);
}

struct ThresholdCoeffs {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
};

// Coefficients of f(N) = c1 a^N + c2 d^N + c3, the exact value of
// "play `category` for N rounds, then the other arm forever" from
// belief b, where (a, d) are `category`'s click probabilities.
inline ThresholdCoeffs threshold_coeffs(const Instance& inst, int category,
                                        double b) {
  detail::require_planning_2x2(inst, "threshold_coeffs");
  detail::require(category == 1 || category == 2,
                  "threshold_coeffs: category out of range");
  int other = 3 - category;
  double ux = inst.p(category, 1), uy = inst.p(category, 2);
  double vx = inst.p(other, 1), vy = inst.p(other, 2);
  ThresholdCoeffs c;
  c.c1 = b * (ux / (ux - 1.0) + vx / (1.0 - vx));
  c.c2 = (1.0 - b) * (uy / (uy - 1.0) + vy / (1.0 - vy));
  c.c3 = b * ux / (1.0 - ux) + (1.0 - b) * uy / (1.0 - uy);
  return c;
}

// Exact value of the threshold policy that plays `category` for
// switch_count rounds and the other arm afterwards.
inline double threshold_value_exact(const Instance& inst, int category,
                                    std::int64_t switch_count, double b) {
  detail::require(switch_count >= 0,
                  "threshold_value_exact: switch count must be >= 0");
  ThresholdCoeffs c = threshold_coeffs(inst, category, b);
  double ux = inst.p(category, 1), uy = inst.p(category, 2);
  double n = static_cast<double>(switch_count);
  return c.c1 * std::pow(ux, n) + c.c2 * std::pow(uy, n) + c.c3;
}

// Exact value of an arbitrary prefix-then-tail policy: truncated terms
// for the prefix plus a geometric series for the tail.
inline double policy_value_exact(const Instance& inst, const Policy& policy,
                                 double b) {
  detail::require_planning_2x2(inst, "policy_value_exact");
  validate_policy(policy, inst);
  Policy c = policy.canonical();
  double p1x = inst.p(1, 1), p1y = inst.p(1, 2);
  double p2x = inst.p(2, 1), p2y = inst.p(2, 2);
  int m1 = 0, m2 = 0;
  double v = 0.0;
  for (std::size_t i = 0; i < c.prefix.size(); ++i) {
    (c.prefix[i] == 1 ? m1 : m2) += 1;
    v += b * std::pow(p1x, m1) * std::pow(p2x, m2) +
         (1.0 - b) * std::pow(p1y, m1) * std::pow(p2y, m2);
  }
  double wx = std::pow(p1x, m1) * std::pow(p2x, m2);
  double wy = std::pow(p1y, m1) * std::pow(p2y, m2);
  double tx = inst.p(c.tail, 1), ty = inst.p(c.tail, 2);
  return v + wx * b * tx / (1.0 - tx) + wy * (1.0 - b) * ty / (1.0 - ty);
}

struct SaddleInfo {
  ThresholdCoeffs coeffs;
  double n_tilde = 0.0;  // stationary point of f, may be negative
  double n_star = 0.0;   // max(0, n_tilde), capped at kSaddleCap
  bool capped = false;
};

// Stationary point of the dominant-column threshold family (play 2,
// then 1) on a normalized instance.  Requires strict geometry:
// P(2,x) != P(2,y) and P(1,x) != P(2,x), otherwise f degenerates and
// the threshold family reduces to the fixed arms.
inline SaddleInfo saddle_point(const Instance& inst, double b) {
  detail::require_planning_2x2(inst, "saddle_point");
  detail::require(b > 0.0 && b < 1.0, "saddle_point: belief must lie in (0, 1)");
  double p1x = inst.p(1, 1);
  double p2x = inst.p(2, 1), p2y = inst.p(2, 2);
  if (p2x == p2y)
    throw std::domain_error("saddle_point: P(2,x) == P(2,y), no interior saddle");
  if (p1x == p2x)
    throw std::domain_error("saddle_point: P(1,x) == P(2,x), c1 vanishes");
  SaddleInfo s;
  s.coeffs = threshold_coeffs(inst, 2, b);
  double ratio = -s.coeffs.c2 * std::log(p2y) / (s.coeffs.c1 * std::log(p2x));
  s.n_tilde = std::log(ratio) / std::log(p2x / p2y);
  s.n_star = std::max(0.0, s.n_tilde);
  if (s.n_star > static_cast<double>(kSaddleCap)) {
    s.n_star = static_cast<double>(kSaddleCap);
    s.capped = true;
  }
  return s;
}

struct PlanCandidate {
  Policy policy;  // original (denormalized) category labels
  double value = 0.0;
};

struct PlanResult {
  StructureClass structure;
  std::vector<PlanCandidate> candidates;  // evaluation order, best first kept
  Policy policy;                          // canonical optimal policy
  double value = 0.0;
  std::optional<SaddleInfo> saddle;       // set for strict dominant-column
};

// Optimal-policy computation for 2x2 instances with certain
// departures.  Builds the candidate set dictated by the structure
// class, evaluates each candidate in closed form, and keeps the best;
// ties resolve to the earlier candidate, i.e. the smaller switch count
// and pi^1 before pi^2.  The infinite-switch candidate pi^2 is always
// evaluated by its own geometric series, never as a large-N limit.
inline PlanResult optimal_policy_2x2(const Instance& inst) {
  detail::require_planning_2x2(inst, "optimal_policy_2x2");
  Normalized2x2 norm = normalize_2x2(inst);
  const Instance& n = norm.instance;
  double b = n.q(1);

  PlanResult out;
  out.structure = norm.structure;

  std::vector<std::pair<Policy, double>> cands;  // normalized labels
  auto add_fixed = [&](int a) {
    cands.emplace_back(Policy::fixed(a), fixed_arm_value(n, a, b));
  };
  switch (norm.structure.kind) {
    case StructureKind::DominantRow:
      add_fixed(1);
      break;
    case StructureKind::DominantColumn: {
      bool degenerate = (n.p(2, 1) == n.p(2, 2)) || (n.p(1, 1) == n.p(2, 1));
      if (degenerate) {
        add_fixed(1);
        add_fixed(2);
      } else {
        SaddleInfo s = saddle_point(n, b);
        out.saddle = s;
        auto lo = static_cast<std::int64_t>(std::floor(s.n_star));
        auto hi = static_cast<std::int64_t>(std::ceil(s.n_star));
        add_fixed(1);  // switch count 0
        if (lo > 0)
          cands.emplace_back(Policy::threshold2(2, static_cast<int>(lo)),
                             threshold_value_exact(n, 2, lo, b));
        if (hi > 0 && hi != lo)
          cands.emplace_back(Policy::threshold2(2, static_cast<int>(hi)),
                             threshold_value_exact(n, 2, hi, b));
        add_fixed(2);  // switch count infinity
      }
      break;
    }
    case StructureKind::DominantDiagonal:
      add_fixed(1);
      add_fixed(2);
      break;
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i)
    if (cands[i].second > cands[best].second) best = i;

  for (auto& [policy, value] : cands)
    out.candidates.push_back(
        {denormalize_policy(policy, norm.structure).canonical(), value});
  out.policy = out.candidates[best].policy;
  out.value = cands[best].second;
  return out;
}

// Exact optimal value when a planner covers the instance family:
// single-type instances, or 2x2 with certain departures.
inline std::optional<double> exact_optimal_value(const Instance& inst) {
  if (inst.num_types == 1) return single_type_optimal_arm(inst).value;
  if (inst.num_types == 2 && inst.num_categories == 2 &&
      inst.all_departures_one())
    return optimal_policy_2x2(inst).value;
  return std::nullopt;
}

}  // namespace depbandits

#endif  // DEPBANDITS_PLANNING_HPP
