#ifndef DEPBANDITS_ENVIRONMENT_HPP
#define DEPBANDITS_ENVIRONMENT_HPP

// Episode simulator.
//
// One episode: a user type is drawn from the prior (one uniform), then
// for j = 1, 2, ... the policy's category a_j is recommended.  The
// user clicks with probability P(a_j, type) -- reward 1, user stays.
// On a no-click the user departs with probability L(a_j, type).  The
// episode return is the number of clicks; the episode length counts
// every recommendation, including the final no-click one.  With all
// departure probabilities 1, length = return + 1.
//
// Draw order is fixed (type, then per iteration click then departure)
// so traces are reproducible byte-for-byte from the seed.  A stream of
// episodes gives episode t the rng sub-stream (seed, t), making episode
// outcomes independent of how many draws earlier episodes consumed.

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace depbandits {

inline constexpr std::int64_t kMaxEpisodeLength = 10'000'000;

struct EpisodeResult {
  std::int64_t clicks = 0;  // return
  std::int64_t length = 0;  // recommendations issued
};

inline int sample_type(const Instance& inst, RngStream& rng) {
  double u = rng.next_uniform();
  double acc = 0.0;
  for (int x = 1; x <= inst.num_types; ++x) {
    acc += inst.q(x);
    if (u < acc) return x;
  }
  return inst.num_types;  // guard against rounding in the prior's sum
}

// Simulates one episode.  Throws std::runtime_error if the episode
// exceeds max_length recommendations (possible only when some
// departure probability is tiny).
inline EpisodeResult run_episode(const Instance& inst, const Policy& policy,
                                 RngStream& rng,
                                 std::int64_t max_length = kMaxEpisodeLength) {
  int type = sample_type(inst, rng);
  EpisodeResult ep;
  for (std::int64_t j = 1;; ++j) {
    if (j > max_length)
      throw std::runtime_error("run_episode: episode exceeded " +
                               std::to_string(max_length) +
                               " recommendations");
    int a = policy.at(j);
    ++ep.length;
    if (rng.bernoulli(inst.p(a, type))) {
      ++ep.clicks;
      continue;
    }
    if (rng.bernoulli(inst.l(a, type))) break;
  }
  return ep;
}

struct StreamResult {
  std::vector<int> policy_ids;         // learner's id per episode
  std::vector<EpisodeResult> episodes;

  double total_return() const {
    double s = 0.0;
    for (const auto& ep : episodes) s += static_cast<double>(ep.clicks);
    return s;
  }
};

// Runs T episodes against a learner.  The learner must provide
//   int choose();
//   const Policy& policy_for(int id) const;
//   void observe(int id, double ret, std::int64_t length);
// Episode t uses rng stream (seed, t), t = 0..T-1.
template <class Learner>
StreamResult run_stream(const Instance& inst, Learner& learner, std::int64_t T,
                        std::uint64_t seed,
                        std::int64_t max_length = kMaxEpisodeLength) {
  if (T < 1) throw std::invalid_argument("run_stream: T must be >= 1");
  StreamResult out;
  out.policy_ids.reserve(static_cast<std::size_t>(T));
  out.episodes.reserve(static_cast<std::size_t>(T));
  for (std::int64_t t = 0; t < T; ++t) {
    int id = learner.choose();
    const Policy& policy = learner.policy_for(id);
    RngStream rng(seed, static_cast<std::uint64_t>(t));
    EpisodeResult ep = run_episode(inst, policy, rng, max_length);
    learner.observe(id, static_cast<double>(ep.clicks), ep.length);
    out.policy_ids.push_back(id);
    out.episodes.push_back(ep);
  }
  return out;
}

// Trivial learner that always plays one policy (id 0).
class SinglePolicyLearner {
 public:
  explicit SinglePolicyLearner(Policy p) : policy_(std::move(p)) {}
  int choose() const { return 0; }
  const Policy& policy_for(int) const { return policy_; }
  void observe(int, double, std::int64_t) {}

 private:
  Policy policy_;
};

inline StreamResult run_policy_stream(const Instance& inst, const Policy& policy,
                                      std::int64_t T, std::uint64_t seed,
                                      std::int64_t max_length = kMaxEpisodeLength) {
  SinglePolicyLearner learner(policy);
  return run_stream(inst, learner, T, seed, max_length);
}

// Episode log: "episode,policy_id,return,length", episodes numbered
// from 1.
inline void write_episodes_csv(std::ostream& os, const StreamResult& sr) {
  os << "episode,policy_id,return,length\n";
  for (std::size_t i = 0; i < sr.episodes.size(); ++i)
    os << (i + 1) << ',' << sr.policy_ids[i] << ',' << sr.episodes[i].clicks
       << ',' << sr.episodes[i].length << '\n';
}

}  // namespace depbandits

#endif  // DEPBANDITS_ENVIRONMENT_HPP
