#ifndef DEPBANDITS_TESTS_SUPPORT_HPP
#define DEPBANDITS_TESTS_SUPPORT_HPP

// Shared fixtures and reference evaluators for the test suites.  The
// evaluators here are deliberately naive (direct sums, exhaustive
// enumeration) so they cross-check the library's closed forms through
// independent arithmetic.

#include <cstdint>
#include <string>
#include <vector>

#include "depbandits/core.hpp"

namespace testsupport {

inline std::string data_path(const std::string& name) {
#ifdef DEPBANDITS_DATA_DIR
  return std::string(DEPBANDITS_DATA_DIR) + "/" + name;
#else
  return "data/" + name;
#endif
}

inline depbandits::Instance make_instance(std::vector<double> q,
                                          depbandits::Matrix P,
                                          depbandits::Matrix L, double eps) {
  depbandits::Instance inst;
  inst.num_types = static_cast<int>(q.size());
  inst.num_categories = static_cast<int>(P.size());
  inst.prior = std::move(q);
  inst.click = std::move(P);
  inst.depart = std::move(L);
  inst.epsilon = eps;
  return depbandits::validate_instance(inst);
}

// The worked two-type example used throughout the suites:
//   q = (0.4, 0.6), P = [[0.5, 0.28], [0.4, 0.39]], L = 1, eps = 0.5.
inline depbandits::Instance worked_example() {
  return make_instance({0.4, 0.6}, {{0.5, 0.28}, {0.4, 0.39}},
                       {{1.0, 1.0}, {1.0, 1.0}}, 0.5);
}

// Instance with every departure probability 1 and uniform types.
inline depbandits::Instance uniform_2x2(depbandits::Matrix P, double eps) {
  return make_instance({0.5, 0.5}, std::move(P), {{1.0, 1.0}, {1.0, 1.0}}, eps);
}

// Expected clicks from the first `horizon` recommendations of an
// explicit category sequence when every no-click departs: per type,
// survival to iteration i multiplies the clicked probabilities.
inline double sequence_value(const depbandits::Instance& inst,
                             const std::vector<int>& actions) {
  double total = 0.0;
  for (int x = 1; x <= inst.num_types; ++x) {
    double alive = 1.0, acc = 0.0;
    for (int a : actions) {
      alive *= inst.p(a, x);
      acc += alive;
    }
    total += inst.q(x) * acc;
  }
  return total;
}

struct BestSequence {
  std::vector<int> actions;
  double value = 0.0;
};

// Exhaustive maximum over all 2^H two-category sequences of length H.
inline BestSequence exhaustive_best_sequence(const depbandits::Instance& inst,
                                             int horizon) {
  BestSequence best;
  std::vector<int> actions(static_cast<std::size_t>(horizon), 1);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << horizon); ++mask) {
    for (int i = 0; i < horizon; ++i)
      actions[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? 2 : 1;
    double v = sequence_value(inst, actions);
    if (best.actions.empty() || v > best.value) best = {actions, v};
  }
  return best;
}

}  // namespace testsupport

#endif  // DEPBANDITS_TESTS_SUPPORT_HPP
