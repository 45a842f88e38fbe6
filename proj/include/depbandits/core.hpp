#ifndef DEPBANDITS_CORE_HPP
#define DEPBANDITS_CORE_HPP

// Core types for recommendation streams with departing users.
//
// An instance describes K content categories and M latent user types:
//   prior     q      -- distribution over types, drawn once per episode
//   click     P(a,x) -- probability type x clicks a category-a item
//   depart    L(a,x) -- probability type x leaves after a no-click
//   epsilon          -- click margin, max_a,x P(a,x) <= 1 - epsilon
//
// Categories and types are addressed with 1-based labels throughout the
// library (a in 1..K, x in 1..M), matching the way policies such as
// "(2,6)" are written; the raw row-major storage is an implementation
// detail behind p()/l().
//
// A policy is a deterministic recommendation sequence: a finite prefix
// of category labels followed by one label repeated forever.  Fixed-arm
// and threshold policies are special cases.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace depbandits {

// Single tolerance for comparing exactly-computed values (closed forms,
// dynamic programs, enumeration) against each other.  These agree to
// floating-point rounding, so any honest comparison passes at 1e-12.
inline constexpr double kValueTolerance = 1e-12;

using Matrix = std::vector<std::vector<double>>;

struct Instance {
  int num_types = 0;                  // M
  int num_categories = 0;             // K
  std::vector<double> prior;          // q, size M
  Matrix click;                       // P, K rows of M entries
  Matrix depart;                      // L, K rows of M entries
  double epsilon = std::numeric_limits<double>::quiet_NaN();

  // 1-based accessors: category a in 1..K, type x in 1..M.
  double p(int a, int x) const { return click[a - 1][x - 1]; }
  double l(int a, int x) const { return depart[a - 1][x - 1]; }
  double q(int x) const { return prior[x - 1]; }

  double max_click() const {
    double m = 0.0;
    for (const auto& row : click)
      for (double v : row) m = std::max(m, v);
    return m;
  }

  bool all_departures_one() const {
    for (const auto& row : depart)
      for (double v : row)
        if (v != 1.0) return false;
    return true;
  }
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace detail

// Checks shapes, stochasticity of the prior, probability ranges and the
// click margin.  If epsilon is NaN it is derived as 1 - max click
// probability.  Throws std::invalid_argument on any violation.
inline Instance validate_instance(Instance inst) {
  using detail::require;
  require(inst.num_types >= 1, "instance: M must be >= 1");
  require(inst.num_categories >= 1, "instance: K must be >= 1");
  require(static_cast<int>(inst.prior.size()) == inst.num_types,
          "instance: prior must have M entries");
  double qsum = 0.0;
  for (double q : inst.prior) {
    require(std::isfinite(q) && q >= 0.0, "instance: prior entries must be >= 0");
    qsum += q;
  }
  require(std::abs(qsum - 1.0) <= 1e-12, "instance: prior must sum to 1");
  require(static_cast<int>(inst.click.size()) == inst.num_categories,
          "instance: click matrix must have K rows");
  require(static_cast<int>(inst.depart.size()) == inst.num_categories,
          "instance: departure matrix must have K rows");

  double max_p = 0.0;
  for (const auto& row : inst.click) {
    require(static_cast<int>(row.size()) == inst.num_types,
            "instance: click rows must have M entries");
    for (double v : row) {
      require(std::isfinite(v) && v > 0.0 && v < 1.0,
              "instance: click probabilities must lie in (0, 1)");
      max_p = std::max(max_p, v);
    }
  }
  for (const auto& row : inst.depart) {
    require(static_cast<int>(row.size()) == inst.num_types,
            "instance: departure rows must have M entries");
    for (double v : row)
      require(std::isfinite(v) && v > 0.0 && v <= 1.0,
              "instance: departure probabilities must lie in (0, 1]");
  }

  if (std::isnan(inst.epsilon)) inst.epsilon = 1.0 - max_p;
  require(std::isfinite(inst.epsilon) && inst.epsilon > 0.0 && inst.epsilon < 1.0,
          "instance: epsilon must lie in (0, 1)");
  require(max_p <= 1.0 - inst.epsilon + 1e-15,
          "instance: click probabilities must not exceed 1 - epsilon");
  return inst;
}

// --- structured-text (JSON) instance files ------------------------------

inline Instance instance_from_json(const nlohmann::json& j) {
  Instance inst;
  inst.num_types = j.at("M").get<int>();
  inst.num_categories = j.at("K").get<int>();
  inst.prior = j.at("q").get<std::vector<double>>();
  inst.click = j.at("P").get<Matrix>();
  inst.depart = j.at("L").get<Matrix>();
  if (j.contains("epsilon")) inst.epsilon = j.at("epsilon").get<double>();
  return validate_instance(std::move(inst));
}

inline nlohmann::json instance_to_json(const Instance& inst) {
  return nlohmann::json{{"M", inst.num_types}, {"K", inst.num_categories},
                        {"q", inst.prior},     {"P", inst.click},
                        {"L", inst.depart},    {"epsilon", inst.epsilon}};
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed instance file " + path + ": " + e.what());
  }
  try {
    return instance_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed instance file " + path + ": " + e.what());
  }
}

inline void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << instance_to_json(inst).dump(2) << "\n";
}

// --- policies -----------------------------------------------------------

// Deterministic recommendation sequence: prefix then tail forever.
struct Policy {
  std::vector<int> prefix;  // category labels, 1-based
  int tail = 1;             // category repeated after the prefix

  // Category recommended at iteration j (1-based).
  int at(std::int64_t j) const {
    return j <= static_cast<std::int64_t>(prefix.size())
               ? prefix[static_cast<std::size_t>(j - 1)]
               : tail;
  }

  // Normal form: trailing prefix entries equal to the tail are
  // redundant, so drop them.  Two policies with the same normal form
  // recommend identically at every iteration.
  Policy canonical() const {
    Policy p = *this;
    while (!p.prefix.empty() && p.prefix.back() == p.tail) p.prefix.pop_back();
    return p;
  }

  bool operator==(const Policy& o) const {
    Policy a = canonical(), b = o.canonical();
    return a.tail == b.tail && a.prefix == b.prefix;
  }

  static Policy fixed(int category) { return Policy{{}, category}; }

  // Threshold policy: play `category` for the first h iterations, then
  // `other` forever.  For K = 2 the partner arm is implied.
  static Policy threshold(int category, int h, int other) {
    Policy p;
    p.prefix.assign(static_cast<std::size_t>(h), category);
    p.tail = other;
    return p;
  }
  static Policy threshold2(int category, int h) {
    return threshold(category, h, 3 - category);
  }
};

// True when the canonical form is "a repeated h times, then the other
// of two arms"; used for pretty-printing.
inline bool threshold_shape2(const Policy& p, int* category, int* h) {
  Policy c = p.canonical();
  if (c.tail != 1 && c.tail != 2) return false;
  int a = 3 - c.tail;
  for (int v : c.prefix)
    if (v != a) return false;
  *category = a;
  *h = static_cast<int>(c.prefix.size());
  return true;
}

// Human-readable label: "pi^2", "(2,6)", or an explicit sequence.
inline std::string to_string(const Policy& p) {
  Policy c = p.canonical();
  std::ostringstream os;
  if (c.prefix.empty()) {
    os << "pi^" << c.tail;
    return os.str();
  }
  int a = 0, h = 0;
  if (threshold_shape2(c, &a, &h)) {
    os << "(" << a << "," << h << ")";
    return os.str();
  }
  os << "[";
  for (std::size_t i = 0; i < c.prefix.size(); ++i)
    os << (i ? " " : "") << c.prefix[i];
  os << " | " << c.tail << "]";
  return os.str();
}

// Comma-free label for CSV cells: "fix:2", "thr:2:6", "seq:1-2-2:1".
inline std::string csv_label(const Policy& p) {
  Policy c = p.canonical();
  std::ostringstream os;
  if (c.prefix.empty()) {
    os << "fix:" << c.tail;
    return os.str();
  }
  int a = 0, h = 0;
  if (threshold_shape2(c, &a, &h)) {
    os << "thr:" << a << ":" << h;
    return os.str();
  }
  os << "seq:";
  for (std::size_t i = 0; i < c.prefix.size(); ++i)
    os << (i ? "-" : "") << c.prefix[i];
  os << ":" << c.tail;
  return os.str();
}

// Parses the csv_label() forms plus bare "1"/"2" as fixed arms.
inline Policy policy_from_string(const std::string& s) {
  auto fail = [&] {
    throw std::invalid_argument("unrecognized policy spec: " + s);
  };
  auto parse_int = [&](const std::string& t) {
    try {
      std::size_t pos = 0;
      int v = std::stoi(t, &pos);
      if (pos != t.size()) fail();
      return v;
    } catch (const std::logic_error&) {
      fail();
      return 0;
    }
  };
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t colon = s.find(':', start);
    parts.push_back(s.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() == 1) return Policy::fixed(parse_int(parts[0]));
  if (parts[0] == "fix" && parts.size() == 2)
    return Policy::fixed(parse_int(parts[1]));
  if (parts[0] == "thr" && parts.size() == 3)
    return Policy::threshold2(parse_int(parts[1]), parse_int(parts[2]));
  if (parts[0] == "seq" && parts.size() == 3) {
    Policy p;
    std::stringstream ss(parts[1]);
    std::string tok;
    while (std::getline(ss, tok, '-')) p.prefix.push_back(parse_int(tok));
    p.tail = parse_int(parts[2]);
    return p;
  }
  fail();
  return Policy{};
}

// Checks that every recommended category exists in the instance.
inline void validate_policy(const Policy& p, const Instance& inst) {
  auto ok = [&](int a) { return a >= 1 && a <= inst.num_categories; };
  for (int a : p.prefix)
    detail::require(ok(a), "policy: category label out of range");
  detail::require(ok(p.tail), "policy: category label out of range");
}

// --- 2x2 normal form and structure classes ------------------------------

// After permuting categories/types so the largest click probability sits
// at category 1, type x, every 2x2 instance falls in exactly one class:
//   DominantRow      P(1,y) >= P(2,y)          (row 1 dominates)
//   DominantColumn   P(2,x) >= P(2,y) > P(1,y) (column x dominates)
//   DominantDiagonal P(1,x), P(2,y) on top     (otherwise)
enum class StructureKind { DominantRow, DominantColumn, DominantDiagonal };

inline std::string to_string(StructureKind k) {
  switch (k) {
    case StructureKind::DominantRow: return "DominantRow";
    case StructureKind::DominantColumn: return "DominantColumn";
    default: return "DominantDiagonal";
  }
}

struct StructureClass {
  StructureKind kind = StructureKind::DominantRow;
  bool swapped_categories = false;
  bool swapped_types = false;
};

struct Normalized2x2 {
  Instance instance;  // permuted copy
  StructureClass structure;
};

// Permutes a validated 2x2 instance into normal form and classifies it.
// Ties in the arg-max click probability resolve to the smallest
// category, then the smallest type, so an already-normalized instance
// is returned unchanged.
inline Normalized2x2 normalize_2x2(const Instance& inst) {
  detail::require(inst.num_types == 2 && inst.num_categories == 2,
                  "normalize_2x2: instance must be 2x2");
  int best_a = 1, best_x = 1;
  for (int a = 1; a <= 2; ++a)
    for (int x = 1; x <= 2; ++x)
      if (inst.p(a, x) > inst.p(best_a, best_x)) {
        best_a = a;
        best_x = x;
      }

  Normalized2x2 out{inst, {}};
  out.structure.swapped_categories = (best_a == 2);
  out.structure.swapped_types = (best_x == 2);
  Instance& n = out.instance;
  if (out.structure.swapped_categories) {
    std::swap(n.click[0], n.click[1]);
    std::swap(n.depart[0], n.depart[1]);
  }
  if (out.structure.swapped_types) {
    for (auto& row : n.click) std::swap(row[0], row[1]);
    for (auto& row : n.depart) std::swap(row[0], row[1]);
    std::swap(n.prior[0], n.prior[1]);
  }

  if (n.p(1, 2) >= n.p(2, 2)) {
    out.structure.kind = StructureKind::DominantRow;
  } else if (n.p(2, 1) >= n.p(2, 2)) {
    out.structure.kind = StructureKind::DominantColumn;
  } else {
    out.structure.kind = StructureKind::DominantDiagonal;
  }
  return out;
}

// Maps a policy stated in normalized category labels back to the
// original instance's labels.  Type permutation does not affect
// policies.  Value-preserving: the policy plays the same click
// probabilities against each (relabeled) type.
inline Policy denormalize_policy(Policy p, const StructureClass& sc) {
  if (!sc.swapped_categories) return p;
  for (int& a : p.prefix) a = 3 - a;
  p.tail = 3 - p.tail;
  return p;
}

}  // namespace depbandits

#endif  // DEPBANDITS_CORE_HPP
