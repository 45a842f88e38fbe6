#ifndef DEPBANDITS_INSTANCES_HPP
#define DEPBANDITS_INSTANCES_HPP

// Instance generation: random synthetic instances and semi-synthetic
// instances built from a ratings dataset.
//
// Ratings scheme: genres act as categories.  Users lacking a rating in
// any selected genre are dropped.  A user's click probability for a
// genre is 1 - r, where r is the rating normalized by the scale
// maximum (averaged over the user's rated movies in that genre),
// clamped into [margin, 1 - epsilon].  Users are then partitioned into
// M types by k-means on their click vectors; cluster means become the
// click matrix P, cluster proportions the prior q, and departures are
// all 1.  An online mode skips the clustering and simulates episodes
// against the raw per-user, per-movie click probabilities instead.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "environment.hpp"
#include "rng.hpp"

namespace depbandits {

inline constexpr double kDefaultClickMargin = 0.01;
inline constexpr int kRejectionBudget = 100'000;

// Uniform draw from the open-ended range (lo, hi].
inline double uniform_in(RngStream& rng, double lo, double hi) {
  return lo + rng.next_uniform() * (hi - lo);
}

inline std::vector<double> uniform_simplex(RngStream& rng, int m) {
  std::vector<double> g(static_cast<std::size_t>(m));
  double sum = 0.0;
  do {
    sum = 0.0;
    for (double& v : g) {
      v = -std::log(1.0 - rng.next_uniform());
      sum += v;
    }
  } while (sum <= 0.0);
  for (double& v : g) v /= sum;
  return g;
}

// Random instance with click probabilities in (margin, 1-eps],
// departures in (margin, 1] and a uniform-simplex prior.  With a
// target structure (2x2 only) instances are redrawn until the
// classification matches, up to kRejectionBudget draws.
inline Instance random_instance(int K, int M, double epsilon, RngStream& rng,
                                std::optional<StructureKind> target = std::nullopt,
                                double margin = kDefaultClickMargin) {
  detail::require(K >= 1 && M >= 1, "random_instance: K and M must be >= 1");
  detail::require(epsilon > 0.0 && epsilon < 1.0 - margin,
                  "random_instance: epsilon must lie in (0, 1 - margin)");
  detail::require(!target || (K == 2 && M == 2),
                  "random_instance: structure targeting requires K = M = 2");
  for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
    Instance inst;
    inst.num_types = M;
    inst.num_categories = K;
    inst.prior = M == 1 ? std::vector<double>{1.0} : uniform_simplex(rng, M);
    inst.click.assign(static_cast<std::size_t>(K),
                      std::vector<double>(static_cast<std::size_t>(M)));
    inst.depart = inst.click;
    for (auto& row : inst.click)
      for (double& v : row) v = uniform_in(rng, margin, 1.0 - epsilon);
    for (auto& row : inst.depart)
      for (double& v : row) v = uniform_in(rng, margin, 1.0);
    inst.epsilon = epsilon;
    inst = validate_instance(std::move(inst));
    if (!target || normalize_2x2(inst).structure.kind == *target) return inst;
  }
  throw std::runtime_error("random_instance: rejection budget exceeded for target structure");
}

inline Instance random_instance_all_departures_one(
    int K, int M, double epsilon, RngStream& rng,
    std::optional<StructureKind> target = std::nullopt,
    double margin = kDefaultClickMargin) {
  Instance inst = random_instance(K, M, epsilon, rng, target, margin);
  for (auto& row : inst.depart)
    for (double& v : row) v = 1.0;
  return inst;
}

// --- ratings ingestion --------------------------------------------------

struct RatingsConfig {
  double scale_max = 5.0;        // MovieLens rating scale
  char genre_delimiter = '|';
  double epsilon = 0.1;          // margin of the built instance
  double margin = kDefaultClickMargin;
  int kmeans_max_iters = 100;
  int kmeans_reseed_attempts = 10;
};

struct RatingRecord {
  std::int64_t user_id = 0;
  std::int64_t item_id = 0;
  double rating = 0.0;
  std::string genre;
};

struct RatingsTable {
  std::vector<RatingRecord> records;  // one per (rating, selected genre)
  double scale_max = 5.0;
  std::int64_t malformed_rows = 0;
  std::int64_t missing_join_keys = 0;
  std::int64_t items_without_selected_genre = 0;
  std::vector<std::string> skip_report;  // human-readable, with line numbers
};

namespace detail {

// Minimal CSV field splitter with double-quote handling (quoted
// fields may contain commas and doubled quotes).
inline std::vector<std::string> split_csv_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline bool parse_int64(const std::string& s, std::int64_t* out) {
  try {
    std::size_t pos = 0;
    *out = std::stoll(s, &pos);
    return pos == s.size() && !s.empty();
  } catch (const std::logic_error&) {
    return false;
  }
}

inline bool parse_double(const std::string& s, double* out) {
  try {
    std::size_t pos = 0;
    *out = std::stod(s, &pos);
    return pos == s.size() && !s.empty();
  } catch (const std::logic_error&) {
    return false;
  }
}

inline bool looks_like_header(const std::vector<std::string>& fields) {
  std::int64_t ignore;
  return !fields.empty() && !parse_int64(fields[0], &ignore);
}

}  // namespace detail

// Joins a ratings CSV (userId,movieId,rating,timestamp) with an items
// CSV (movieId,title,genres; genres delimiter-separated).  Items keep
// only the genres listed in selected_genres; multi-genre items yield
// one record per selected genre.  Malformed rows and ratings without a
// matching item are skipped and reported with their line numbers.
inline RatingsTable load_ratings(const std::string& ratings_path,
                                 const std::string& items_path,
                                 const std::vector<std::string>& selected_genres,
                                 const RatingsConfig& cfg = {}) {
  detail::require(!selected_genres.empty(),
                  "load_ratings: at least one genre must be selected");
  RatingsTable table;
  table.scale_max = cfg.scale_max;

  std::ifstream items(items_path);
  if (!items) throw std::runtime_error("cannot open items file: " + items_path);
  std::map<std::int64_t, std::vector<std::string>> item_genres;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(items, line)) {
    ++line_no;
    auto fields = detail::split_csv_fields(line);
    if (line_no == 1 && detail::looks_like_header(fields)) continue;
    if (line.empty()) continue;
    std::int64_t item_id = 0;
    if (fields.size() < 3 || !detail::parse_int64(fields[0], &item_id)) {
      ++table.malformed_rows;
      table.skip_report.push_back(items_path + ":" + std::to_string(line_no) +
                                  ": malformed item row");
      continue;
    }
    std::vector<std::string> genres;
    std::stringstream gs(fields[2]);
    std::string g;
    while (std::getline(gs, g, cfg.genre_delimiter))
      if (std::find(selected_genres.begin(), selected_genres.end(), g) !=
          selected_genres.end())
        genres.push_back(g);
    if (genres.empty()) {
      ++table.items_without_selected_genre;
      table.skip_report.push_back(items_path + ":" + std::to_string(line_no) +
                                  ": item " + std::to_string(item_id) +
                                  " has no selected genre");
    }
    item_genres[item_id] = std::move(genres);
  }

  std::ifstream ratings(ratings_path);
  if (!ratings)
    throw std::runtime_error("cannot open ratings file: " + ratings_path);
  line_no = 0;
  while (std::getline(ratings, line)) {
    ++line_no;
    auto fields = detail::split_csv_fields(line);
    if (line_no == 1 && detail::looks_like_header(fields)) continue;
    if (line.empty()) continue;
    std::int64_t user_id = 0, item_id = 0;
    double rating = 0.0;
    if (fields.size() < 3 || !detail::parse_int64(fields[0], &user_id) ||
        !detail::parse_int64(fields[1], &item_id) ||
        !detail::parse_double(fields[2], &rating) || rating < 0.0 ||
        rating > cfg.scale_max) {
      ++table.malformed_rows;
      table.skip_report.push_back(ratings_path + ":" + std::to_string(line_no) +
                                  ": malformed rating row");
      continue;
    }
    auto it = item_genres.find(item_id);
    if (it == item_genres.end()) {
      ++table.missing_join_keys;
      table.skip_report.push_back(ratings_path + ":" + std::to_string(line_no) +
                                  ": unknown item " + std::to_string(item_id));
      continue;
    }
    for (const std::string& genre : it->second)
      table.records.push_back({user_id, item_id, rating, genre});
  }
  return table;
}

// --- semi-synthetic instance construction -------------------------------

namespace detail {

struct UserClicks {
  std::int64_t user_id = 0;
  std::vector<double> clicks;  // one entry per category
};

// Per-user click vectors for users with at least one rating in every
// category, ordered by user id.
inline std::vector<UserClicks> user_click_vectors(
    const RatingsTable& table, const std::vector<std::string>& categories,
    const RatingsConfig& cfg) {
  require(categories.size() >= 1, "user_click_vectors: need categories");
  std::map<std::int64_t, std::vector<std::pair<double, std::int64_t>>> per_user;
  // pair: (rating sum, count) per category
  for (const auto& rec : table.records) {
    auto cat = std::find(categories.begin(), categories.end(), rec.genre);
    if (cat == categories.end()) continue;
    auto& sums = per_user[rec.user_id];
    sums.resize(categories.size(), {0.0, 0});
    auto& cell = sums[static_cast<std::size_t>(cat - categories.begin())];
    cell.first += rec.rating;
    cell.second += 1;
  }
  std::vector<UserClicks> out;
  double lo = cfg.margin, hi = 1.0 - cfg.epsilon;
  require(lo < hi, "user_click_vectors: margin must be below 1 - epsilon");
  for (const auto& [user_id, sums] : per_user) {
    if (sums.size() < categories.size()) continue;
    bool complete = true;
    for (const auto& [_, count] : sums)
      if (count == 0) complete = false;
    if (!complete) continue;  // retention rule
    UserClicks uc{user_id, {}};
    for (const auto& [sum, count] : sums) {
      double mean_rating = sum / static_cast<double>(count);
      double click = 1.0 - mean_rating / table.scale_max;
      uc.clicks.push_back(std::clamp(click, lo, hi));
    }
    out.push_back(std::move(uc));
  }
  return out;  // std::map iteration orders by user id
}

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

struct SemiSyntheticResult {
  Instance instance;
  std::vector<int> user_types;  // 1-based type per retained user
  std::int64_t retained_users = 0;
};

// Builds an M-type instance from a ratings table via k-means on the
// per-user click vectors.  Output types are relabeled in lexicographic
// centroid order so results do not depend on the random initialization
// order.
inline SemiSyntheticResult build_semi_synthetic(
    const RatingsTable& table, const std::vector<std::string>& categories,
    int M, RngStream& rng, const RatingsConfig& cfg = {}) {
  detail::require(categories.size() >= 2, "build_semi_synthetic: K must be >= 2");
  detail::require(M >= 1, "build_semi_synthetic: M must be >= 1");
  auto users = detail::user_click_vectors(table, categories, cfg);
  std::int64_t n = static_cast<std::int64_t>(users.size());
  detail::require(n >= 10 * static_cast<std::int64_t>(M),
                  "build_semi_synthetic: need at least 10*M retained users");

  std::size_t K = categories.size();
  std::size_t Mz = static_cast<std::size_t>(M);
  auto pick_user = [&] {
    auto idx = static_cast<std::size_t>(rng.next_uniform() * static_cast<double>(n));
    return std::min(idx, static_cast<std::size_t>(n - 1));
  };

  // Seeded initialization on distinct user indices.
  std::vector<std::size_t> seeds;
  while (seeds.size() < Mz) {
    std::size_t cand = pick_user();
    if (std::find(seeds.begin(), seeds.end(), cand) == seeds.end())
      seeds.push_back(cand);
  }
  std::vector<std::vector<double>> centroids;
  for (std::size_t s : seeds) centroids.push_back(users[s].clicks);

  std::vector<int> assign(users.size(), 0);
  int reseeds = 0;
  for (int iter = 0; iter < cfg.kmeans_max_iters; ++iter) {
    bool changed = iter == 0;
    for (std::size_t u = 0; u < users.size(); ++u) {
      int best = 0;
      double best_d = detail::sq_dist(users[u].clicks, centroids[0]);
      for (std::size_t c = 1; c < Mz; ++c) {
        double d = detail::sq_dist(users[u].clicks, centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (assign[u] != best) {
        assign[u] = best;
        changed = true;
      }
    }
    std::vector<std::int64_t> counts(Mz, 0);
    for (int a : assign) ++counts[static_cast<std::size_t>(a)];
    bool reseeded = false;
    for (std::size_t c = 0; c < Mz; ++c)
      if (counts[c] == 0) {
        if (++reseeds > cfg.kmeans_reseed_attempts)
          throw std::runtime_error(
              "build_semi_synthetic: empty cluster persisted after reseeding");
        centroids[c] = users[pick_user()].clicks;
        reseeded = true;
      }
    if (reseeded) continue;
    for (auto& c : centroids) std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t u = 0; u < users.size(); ++u)
      for (std::size_t a = 0; a < K; ++a)
        centroids[static_cast<std::size_t>(assign[u])][a] += users[u].clicks[a];
    for (std::size_t c = 0; c < Mz; ++c)
      for (std::size_t a = 0; a < K; ++a)
        centroids[c][a] /= static_cast<double>(counts[c]);
    if (!changed) break;
  }

  std::vector<std::int64_t> counts(Mz, 0);
  for (int a : assign) ++counts[static_cast<std::size_t>(a)];
  for (std::size_t c = 0; c < Mz; ++c)
    if (counts[c] == 0)
      throw std::runtime_error("build_semi_synthetic: empty cluster at convergence");

  // Deterministic type labels: order clusters by centroid.
  std::vector<std::size_t> order(Mz);
  for (std::size_t c = 0; c < Mz; ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return centroids[a] != centroids[b] ? centroids[a] < centroids[b] : a < b;
  });
  std::vector<int> new_label(Mz, 0);
  for (std::size_t rank = 0; rank < Mz; ++rank)
    new_label[order[rank]] = static_cast<int>(rank);

  SemiSyntheticResult out;
  Instance& inst = out.instance;
  inst.num_types = M;
  inst.num_categories = static_cast<int>(K);
  inst.prior.resize(Mz);
  inst.click.assign(K, std::vector<double>(Mz));
  inst.depart.assign(K, std::vector<double>(Mz, 1.0));
  for (std::size_t rank = 0; rank < Mz; ++rank) {
    std::size_t c = order[rank];
    inst.prior[rank] = static_cast<double>(counts[c]) / static_cast<double>(n);
    for (std::size_t a = 0; a < K; ++a) inst.click[a][rank] = centroids[c][a];
  }
  inst.epsilon = cfg.epsilon;
  inst = validate_instance(std::move(inst));

  out.retained_users = n;
  out.user_types.reserve(users.size());
  for (std::size_t u = 0; u < users.size(); ++u)
    out.user_types.push_back(new_label[static_cast<std::size_t>(assign[u])] + 1);
  return out;
}

// --- online ratings-backed simulation -----------------------------------

struct RatingsPools {
  // click_probs[u][a]: clamped 1 - r for each movie user u rated in
  // category a+1; every retained user has a non-empty pool per category.
  std::vector<std::vector<std::vector<double>>> click_probs;
  double depart_prob = 1.0;
};

inline RatingsPools build_ratings_pools(const RatingsTable& table,
                                        const std::vector<std::string>& categories,
                                        const RatingsConfig& cfg = {}) {
  detail::require(categories.size() >= 1, "build_ratings_pools: need categories");
  std::map<std::int64_t, std::vector<std::vector<double>>> per_user;
  double lo = cfg.margin, hi = 1.0 - cfg.epsilon;
  detail::require(lo < hi, "build_ratings_pools: margin must be below 1 - epsilon");
  for (const auto& rec : table.records) {
    auto cat = std::find(categories.begin(), categories.end(), rec.genre);
    if (cat == categories.end()) continue;
    auto& pools = per_user[rec.user_id];
    pools.resize(categories.size());
    double click = 1.0 - rec.rating / table.scale_max;
    pools[static_cast<std::size_t>(cat - categories.begin())].push_back(
        std::clamp(click, lo, hi));
  }
  RatingsPools out;
  for (auto& [user_id, pools] : per_user) {
    if (pools.size() < categories.size()) continue;
    bool complete = true;
    for (const auto& p : pools)
      if (p.empty()) complete = false;
    if (complete) out.click_probs.push_back(std::move(pools));
  }
  detail::require(!out.click_probs.empty(),
                  "build_ratings_pools: no user has ratings in every category");
  return out;
}

// One episode against the raw ratings: a uniform user, then per
// recommendation a uniform rated movie in the category, clicked with
// its own probability.  The departure draw is skipped when departure
// is certain.
inline EpisodeResult run_episode_ratings(const RatingsPools& pools,
                                         const Policy& policy, RngStream& rng,
                                         std::int64_t max_length = kMaxEpisodeLength) {
  auto pick = [&](std::size_t size) {
    auto idx = static_cast<std::size_t>(rng.next_uniform() * static_cast<double>(size));
    return std::min(idx, size - 1);
  };
  const auto& user = pools.click_probs[pick(pools.click_probs.size())];
  EpisodeResult ep;
  for (std::int64_t j = 1;; ++j) {
    if (j > max_length)
      throw std::runtime_error("run_episode_ratings: episode exceeded " +
                               std::to_string(max_length) + " recommendations");
    auto a = static_cast<std::size_t>(policy.at(j) - 1);
    detail::require(a < user.size(), "run_episode_ratings: category out of range");
    const auto& pool = user[a];
    ++ep.length;
    if (rng.bernoulli(pool[pick(pool.size())])) {
      ++ep.clicks;
      continue;
    }
    if (pools.depart_prob >= 1.0 || rng.bernoulli(pools.depart_prob)) break;
  }
  return ep;
}

}  // namespace depbandits

#endif  // DEPBANDITS_INSTANCES_HPP
