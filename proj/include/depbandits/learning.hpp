#ifndef DEPBANDITS_LEARNING_HPP
#define DEPBANDITS_LEARNING_HPP

// UCB learning over a finite policy set.
//
// Episode returns are sub-exponential: with margin eps every policy's
// return has
//
//   tilde_tau = 8e / ln(1/(1-eps)),   eta = 1,
//
// in both the single-type and the two-type threshold settings.  The
// learner keeps an upper bound U per policy, infinite until the first
// pull, and after n pulls uses the hybrid radius
//
//   8 sqrt(eta) tilde_tau ln T / n          while n < 8 eta ln T,
//   sqrt(8 tilde_tau^2 ln T / n)            afterwards,
//
// always playing the argmax-U policy (ties to the lowest id).
//
// Policy sets: the K fixed arms, or all (a,h) threshold policies with
// h <= H ("play a for h rounds, then the other arm"), 2H+2 in total.
// Truncating the threshold switch point at
//
//   H = ceil( ln(T/eps) / ln(1/(1-eps)) )
//
// costs at most (1-eps)^H/eps <= 1/T expected return per episode.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "environment.hpp"

namespace depbandits {

struct SubExpParams {
  double tilde_tau = 0.0;
  double eta = 1.0;
};

inline SubExpParams subexp_params(double epsilon) {
  detail::require(epsilon > 0.0 && epsilon < 1.0,
                  "subexp_params: epsilon must lie in (0, 1)");
  return {8.0 * std::exp(1.0) / std::log(1.0 / (1.0 - epsilon)), 1.0};
}

// The same formulas cover one type (fixed-arm sets) and two types
// (threshold sets); both entry points exist because callers care which
// setting they are in.
inline SubExpParams subexp_params_single_type(double epsilon) {
  return subexp_params(epsilon);
}
inline SubExpParams subexp_params_two_type(double epsilon) {
  return subexp_params(epsilon);
}

inline std::vector<Policy> build_fixed_arm_policy_set(int K) {
  detail::require(K >= 1, "build_fixed_arm_policy_set: K must be >= 1");
  std::vector<Policy> out;
  out.reserve(static_cast<std::size_t>(K));
  for (int a = 1; a <= K; ++a) out.push_back(Policy::fixed(a));
  return out;
}

// All (a,h) threshold policies with h <= H, ids ordered by h then by
// a, so id 0 is (1,0) = pi^2 and id 1 is (2,0) = pi^1.
inline std::vector<Policy> build_threshold_policy_set(int H) {
  detail::require(H >= 0, "build_threshold_policy_set: H must be >= 0");
  std::vector<Policy> out;
  out.reserve(2 * static_cast<std::size_t>(H) + 2);
  for (int h = 0; h <= H; ++h)
    for (int a = 1; a <= 2; ++a) out.push_back(Policy::threshold2(a, h));
  return out;
}

// Smallest switch-point bound making the truncation loss <= 1/T per
// episode.  The tiny downward nudge keeps exact-integer ratios (e.g.
// T = 2, eps = 0.5 giving ln 4 / ln 2 = 2) from ceiling up on rounding
// noise.
inline int horizon_for_T(std::int64_t T, double epsilon) {
  detail::require(T >= 2, "horizon_for_T: T must be >= 2");
  detail::require(epsilon > 0.0 && epsilon < 1.0,
                  "horizon_for_T: epsilon must lie in (0, 1)");
  double ratio = std::log(static_cast<double>(T) / epsilon) /
                 std::log(1.0 / (1.0 - epsilon));
  return static_cast<int>(std::ceil(ratio - 1e-9));
}

class UcbHybrid {
 public:
  UcbHybrid(std::vector<Policy> policies, std::int64_t T, SubExpParams params)
      : policies_(std::move(policies)),
        pulls_(policies_.size(), 0),
        length_sums_(policies_.size(), 0),
        return_sums_(policies_.size(), 0.0),
        upper_(policies_.size(), std::numeric_limits<double>::infinity()),
        T_(T),
        tilde_tau_(params.tilde_tau),
        eta_(params.eta) {
    detail::require(!policies_.empty(), "ucb: policy set must be non-empty");
    detail::require(T_ >= 2, "ucb: T must be >= 2 so ln T > 0");
    detail::require(tilde_tau_ > 0.0 && eta_ > 0.0,
                    "ucb: sub-exponential parameters must be positive");
    log_T_ = std::log(static_cast<double>(T_));
  }

  // Hybrid confidence radius after n pulls.
  double radius(std::int64_t n) const {
    double nn = static_cast<double>(n);
    if (nn < 8.0 * eta_ * log_T_)
      return 8.0 * std::sqrt(eta_) * tilde_tau_ * log_T_ / nn;
    return std::sqrt(8.0 * tilde_tau_ * tilde_tau_ * log_T_ / nn);
  }

  // Argmax of the upper bounds, lowest id on ties.  Records the choice
  // so the next observe() can verify it refers to a chosen policy.
  int choose() {
    int best = 0;
    for (int i = 1; i < num_policies(); ++i)
      if (upper_[static_cast<std::size_t>(i)] > upper_[static_cast<std::size_t>(best)])
        best = i;
    last_chosen_ = best;
    return best;
  }

  const Policy& policy_for(int id) const {
    return policies_[static_cast<std::size_t>(check_id(id))];
  }

  // Feeds back the return of the episode just played.  The episode
  // length is recorded but takes no part in the bound updates.
  void observe(int id, double ret, std::int64_t length) {
    check_id(id);
    if (id != last_chosen_)
      throw std::logic_error("ucb: observed a return for a policy that was not chosen");
    last_chosen_ = -1;
    std::size_t i = static_cast<std::size_t>(id);
    pulls_[i] += 1;
    return_sums_[i] += ret;
    length_sums_[i] += length;
    ++episodes_;
    double mean = return_sums_[i] / static_cast<double>(pulls_[i]);
    upper_[i] = mean + radius(pulls_[i]);
  }

  int num_policies() const { return static_cast<int>(policies_.size()); }
  std::int64_t episodes() const { return episodes_; }
  std::int64_t pulls(int id) const { return pulls_[static_cast<std::size_t>(check_id(id))]; }
  double mean(int id) const {
    check_id(id);
    std::size_t i = static_cast<std::size_t>(id);
    return pulls_[i] ? return_sums_[i] / static_cast<double>(pulls_[i]) : 0.0;
  }
  double upper_bound(int id) const { return upper_[static_cast<std::size_t>(check_id(id))]; }
  int last_chosen() const {
    if (last_chosen_ < 0)
      throw std::logic_error("ucb: no policy is awaiting a return");
    return last_chosen_;
  }

 private:
  int check_id(int id) const {
    if (id < 0 || id >= num_policies())
      throw std::out_of_range("ucb: policy id out of range");
    return id;
  }

  std::vector<Policy> policies_;
  std::vector<std::int64_t> pulls_, length_sums_;
  std::vector<double> return_sums_, upper_;
  std::int64_t T_ = 0, episodes_ = 0;
  double tilde_tau_ = 0.0, eta_ = 1.0, log_T_ = 0.0;
  int last_chosen_ = -1;
};

// One learner step: feed back the previous episode's return (if any),
// then pick the next policy.
inline int ucb_hybrid_step(UcbHybrid& state,
                           std::optional<double> last_return) {
  if (last_return) state.observe(state.last_chosen(), *last_return, 0);
  return state.choose();
}

// Cumulative realized regret: entry t-1 holds t * v_star minus the sum
// of the first t returns.
inline std::vector<double> regret_curve(const StreamResult& trace,
                                        double v_star) {
  std::vector<double> out;
  out.reserve(trace.episodes.size());
  double cum = 0.0;
  for (std::size_t t = 0; t < trace.episodes.size(); ++t) {
    cum += static_cast<double>(trace.episodes[t].clicks);
    out.push_back(static_cast<double>(t + 1) * v_star - cum);
  }
  return out;
}

// Cumulative expected regret: replaces each realized return with the
// exact value of the policy played, removing per-episode reward noise.
inline std::vector<double> expected_regret_curve(
    const StreamResult& trace, const std::vector<double>& policy_values,
    double v_star) {
  std::vector<double> out;
  out.reserve(trace.episodes.size());
  double cum = 0.0;
  for (std::size_t t = 0; t < trace.episodes.size(); ++t) {
    cum += v_star - policy_values[static_cast<std::size_t>(trace.policy_ids[t])];
    out.push_back(cum);
  }
  return out;
}

// --- multi-seed experiment driver ---------------------------------------

struct UcbRunSummary {
  std::vector<double> realized_regret;   // cumulative, per episode
  std::vector<double> expected_regret;   // cumulative, per episode
  std::vector<std::int64_t> pulls;       // final pull counts per policy
  int best_policy_id = 0;                // argmax of policy_values
  std::int64_t best_pulls_last_decile = 0;
  std::int64_t episodes_last_decile = 0;
};

// Runs UCB once and reports both regret curves plus pull statistics.
// policy_values must hold the exact expected return of each policy;
// v_star is the regret baseline (optimal over all policies, which may
// exceed every in-set value).
inline UcbRunSummary run_ucb_seed(const Instance& inst,
                                  const std::vector<Policy>& policies,
                                  const std::vector<double>& policy_values,
                                  double v_star, std::int64_t T,
                                  SubExpParams params, std::uint64_t seed) {
  detail::require(policies.size() == policy_values.size(),
                  "run_ucb_seed: one value per policy required");
  UcbHybrid learner(policies, T, params);
  StreamResult trace = run_stream(inst, learner, T, seed);

  UcbRunSummary out;
  out.realized_regret = regret_curve(trace, v_star);
  out.expected_regret = expected_regret_curve(trace, policy_values, v_star);
  out.pulls.resize(policies.size(), 0);
  for (int id : trace.policy_ids) out.pulls[static_cast<std::size_t>(id)] += 1;
  out.best_policy_id = static_cast<int>(
      std::max_element(policy_values.begin(), policy_values.end()) -
      policy_values.begin());
  std::int64_t first_decile_episode = T - T / 10;
  for (std::int64_t t = first_decile_episode; t < T; ++t) {
    ++out.episodes_last_decile;
    if (trace.policy_ids[static_cast<std::size_t>(t)] == out.best_policy_id)
      ++out.best_pulls_last_decile;
  }
  return out;
}

struct CurveAverage {
  std::vector<double> mean;
  std::vector<double> stderr_mean;
};

// Pointwise mean and standard error across equal-length curves.
inline CurveAverage average_curves(const std::vector<std::vector<double>>& curves) {
  detail::require(!curves.empty(), "average_curves: need at least one curve");
  std::size_t n = curves[0].size();
  for (const auto& c : curves)
    detail::require(c.size() == n, "average_curves: curves must have equal length");
  CurveAverage out;
  out.mean.assign(n, 0.0);
  out.stderr_mean.assign(n, 0.0);
  double k = static_cast<double>(curves.size());
  for (const auto& c : curves)
    for (std::size_t i = 0; i < n; ++i) out.mean[i] += c[i];
  for (std::size_t i = 0; i < n; ++i) out.mean[i] /= k;
  if (curves.size() > 1) {
    for (const auto& c : curves)
      for (std::size_t i = 0; i < n; ++i) {
        double d = c[i] - out.mean[i];
        out.stderr_mean[i] += d * d;
      }
    for (std::size_t i = 0; i < n; ++i)
      out.stderr_mean[i] = std::sqrt(out.stderr_mean[i] / (k - 1.0) / k);
  }
  return out;
}

}  // namespace depbandits

#endif  // DEPBANDITS_LEARNING_HPP
