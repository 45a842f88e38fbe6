#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "doctest.h"

#include "depbandits/instances.hpp"
#include "depbandits/planning.hpp"
#include "support.hpp"

using namespace depbandits;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  f << content;
}

struct TempFile {
  std::string path;
  TempFile(std::string p, const std::string& content) : path(std::move(p)) {
    write_file(path, content);
  }
  ~TempFile() { std::remove(path.c_str()); }
};

const char* kItemsCsv =
    "movieId,title,genres\n"
    "1,Alpha,Comedy|Drama\n"
    "2,Beta,Comedy\n"
    "3,Gamma,Drama\n"
    "4,Delta,Horror\n"
    "5,\"Epsilon, The\",Comedy|Horror\n";

const char* kRatingsCsv =
    "userId,movieId,rating,timestamp\n"
    "1,1,4.0,111\n"
    "1,3,2.0,112\n"
    "2,2,5.0,113\n"
    "2,3,1.0,114\n"
    "3,1,3.0,115\n"
    "bad line\n"
    "4,2,notanumber,116\n"
    "5,999,4.0,117\n"
    "1,5,7.5,119\n";

std::vector<std::string> comedy_drama() { return {"Comedy", "Drama"}; }

}  // namespace

TEST_CASE("random instances validate and honor their parameters") {
  RngStream rng(2023);
  for (int trial = 0; trial < 30; ++trial) {
    Instance inst = random_instance(3, 2, 0.25, rng);
    CHECK(inst.num_categories == 3);
    CHECK(inst.num_types == 2);
    CHECK(inst.max_click() <= 1.0 - 0.25);
    for (const auto& row : inst.click)
      for (double v : row) CHECK(v > kDefaultClickMargin - 1e-12);
    CHECK_NOTHROW(validate_instance(inst));
  }
  Instance single = random_instance(2, 1, 0.3, rng);
  CHECK(single.prior == std::vector<double>{1.0});

  Instance ones = random_instance_all_departures_one(2, 2, 0.3, rng);
  CHECK(ones.all_departures_one());
}

TEST_CASE("random instances are reproducible by seed") {
  RngStream a(77), b(77), c(78);
  Instance ia = random_instance(2, 2, 0.3, a);
  Instance ib = random_instance(2, 2, 0.3, b);
  Instance ic = random_instance(2, 2, 0.3, c);
  CHECK(ia.click == ib.click);
  CHECK(ia.prior == ib.prior);
  CHECK(ia.depart == ib.depart);
  CHECK(ia.click != ic.click);
}

TEST_CASE("structure targeting hits each class") {
  RngStream rng(5);
  for (auto kind : {StructureKind::DominantRow, StructureKind::DominantColumn,
                    StructureKind::DominantDiagonal}) {
    for (int trial = 0; trial < 5; ++trial) {
      Instance inst = random_instance(2, 2, 0.3, rng, kind);
      CHECK(normalize_2x2(inst).structure.kind == kind);
    }
  }
  CHECK_THROWS_AS(random_instance(3, 2, 0.3, rng, StructureKind::DominantRow),
                  std::invalid_argument);
}

TEST_CASE("ratings ingestion joins items and reports skipped lines") {
  TempFile items("ti_items.csv", kItemsCsv);
  TempFile ratings("ti_ratings.csv", kRatingsCsv);
  RatingsTable table = load_ratings(ratings.path, items.path, comedy_drama());

  // Multi-genre items contribute one record per selected genre: rows
  // for movie 1 double, rows for movies 2 and 3 appear once.
  CHECK(table.records.size() == 7);
  CHECK(table.malformed_rows == 3);          // short row, bad number, 7.5 > 5
  CHECK(table.missing_join_keys == 1);       // movie 999
  CHECK(table.items_without_selected_genre == 1);  // Horror-only Delta

  // Line numbers appear in the skip report.
  REQUIRE(table.skip_report.size() == 5);
  bool has_line7 = false, has_line9 = false;
  for (const auto& s : table.skip_report) {
    has_line7 = has_line7 || s.find("ti_ratings.csv:7") != std::string::npos;
    has_line9 = has_line9 || s.find("ti_ratings.csv:9") != std::string::npos;
  }
  CHECK(has_line7);  // "bad line"
  CHECK(has_line9);  // unknown movie 999

  // The quoted title with an embedded comma parses as one field, so
  // the Comedy genre of movie 5 is still recognized.
  bool movie5_known = false;
  for (const auto& s : table.skip_report)
    movie5_known = movie5_known || s.find("item 5") != std::string::npos;
  CHECK_FALSE(movie5_known);
}

TEST_CASE("ratings ingestion edge cases") {
  SUBCASE("empty files give an empty table") {
    TempFile items("te_items.csv", "movieId,title,genres\n");
    TempFile ratings("te_ratings.csv", "userId,movieId,rating,timestamp\n");
    RatingsTable table = load_ratings(ratings.path, items.path, comedy_drama());
    CHECK(table.records.empty());
    CHECK(table.malformed_rows == 0);
  }
  SUBCASE("windows line endings are tolerated") {
    TempFile items("tw_items.csv", "movieId,title,genres\r\n1,Alpha,Comedy\r\n");
    TempFile ratings("tw_ratings.csv", "userId,movieId,rating,timestamp\r\n1,1,4.0,9\r\n");
    RatingsTable table = load_ratings(ratings.path, items.path, {"Comedy"});
    REQUIRE(table.records.size() == 1);
    CHECK(table.records[0].rating == 4.0);
    CHECK(table.records[0].genre == "Comedy");
  }
  SUBCASE("missing files raise errors") {
    TempFile items("tm_items.csv", kItemsCsv);
    CHECK_THROWS_AS(load_ratings("no_such.csv", items.path, comedy_drama()),
                    std::runtime_error);
    CHECK_THROWS_AS(load_ratings(items.path, "no_such.csv", comedy_drama()),
                    std::runtime_error);
  }
  SUBCASE("at least one genre must be selected") {
    TempFile items("tg_items.csv", kItemsCsv);
    TempFile ratings("tg_ratings.csv", kRatingsCsv);
    CHECK_THROWS_AS(load_ratings(ratings.path, items.path, {}),
                    std::invalid_argument);
  }
}

namespace {

// A ratings table with two clear user populations: `lovers_a` users
// rate genre A high and B low, the rest do the opposite.  Every user
// rates one movie per genre (movie 1 = A, movie 2 = B).
RatingsTable two_population_table(int lovers_a, int lovers_b) {
  RatingsTable table;
  table.scale_max = 5.0;
  std::int64_t uid = 1;
  for (int i = 0; i < lovers_a; ++i, ++uid) {
    table.records.push_back({uid, 1, 5.0, "A"});
    table.records.push_back({uid, 2, 1.0, "B"});
  }
  for (int i = 0; i < lovers_b; ++i, ++uid) {
    table.records.push_back({uid, 1, 1.0, "A"});
    table.records.push_back({uid, 2, 5.0, "B"});
  }
  return table;
}

}  // namespace

TEST_CASE("semi-synthetic single-type instances average the population") {
  RatingsTable table;
  table.scale_max = 5.0;
  for (std::int64_t uid = 1; uid <= 12; ++uid) {
    double r = uid <= 6 ? 1.0 : 3.0;  // population mean rating 2.0 on A
    table.records.push_back({uid, 1, r, "A"});
    table.records.push_back({uid, 2, 2.5, "B"});
  }
  RngStream rng(1);
  SemiSyntheticResult res = build_semi_synthetic(table, {"A", "B"}, 1, rng);
  CHECK(res.retained_users == 12);
  CHECK(res.instance.num_types == 1);
  CHECK(res.instance.prior == std::vector<double>{1.0});
  // Mean click on A: half the users at 1 - 0.2 = 0.8, half at
  // 1 - 0.6 = 0.4, average 0.6; on B everyone at 1 - 0.5 = 0.5.
  CHECK(res.instance.p(1, 1) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(res.instance.p(2, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(res.instance.all_departures_one());
}

TEST_CASE("semi-synthetic clustering recovers two populations") {
  RatingsTable table = two_population_table(30, 20);
  RngStream rng(99);
  RatingsConfig cfg;
  SemiSyntheticResult res = build_semi_synthetic(table, {"A", "B"}, 2, rng, cfg);
  const Instance& inst = res.instance;
  CHECK(res.retained_users == 50);
  REQUIRE(inst.num_types == 2);

  // A-lovers click A with the clamped floor and B with 0.8; types are
  // labeled in lexicographic centroid order, so they come first.
  CHECK(inst.p(1, 1) == doctest::Approx(cfg.margin).epsilon(1e-12));
  CHECK(inst.p(2, 1) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(inst.p(1, 2) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(inst.p(2, 2) == doctest::Approx(cfg.margin).epsilon(1e-12));
  CHECK(inst.q(1) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(inst.q(2) == doctest::Approx(0.4).epsilon(1e-12));

  // Per-user labels follow the same relabeling.
  REQUIRE(res.user_types.size() == 50);
  for (int i = 0; i < 30; ++i) CHECK(res.user_types[static_cast<std::size_t>(i)] == 1);
  for (int i = 30; i < 50; ++i) CHECK(res.user_types[static_cast<std::size_t>(i)] == 2);

  // The output is a valid instance regardless of the data.
  CHECK_NOTHROW(validate_instance(inst));
}

TEST_CASE("clustering is reproducible by seed") {
  RatingsTable table = two_population_table(15, 15);
  RngStream a(7), b(7);
  SemiSyntheticResult ra = build_semi_synthetic(table, {"A", "B"}, 2, a);
  SemiSyntheticResult rb = build_semi_synthetic(table, {"A", "B"}, 2, b);
  CHECK(ra.instance.click == rb.instance.click);
  CHECK(ra.instance.prior == rb.instance.prior);
  CHECK(ra.user_types == rb.user_types);
}

TEST_CASE("uninformative ratings collapse to a fixed-arm plan") {
  RatingsTable table;
  table.scale_max = 5.0;
  // Enough users that a two-cluster request passes the size gate and
  // fails only because the data cannot be split.
  for (std::int64_t uid = 1; uid <= 25; ++uid) {
    table.records.push_back({uid, 1, 3.0, "A"});
    table.records.push_back({uid, 2, 3.0, "B"});
  }
  RngStream rng(3);
  SemiSyntheticResult res = build_semi_synthetic(table, {"A", "B"}, 1, rng);
  CHECK(res.instance.p(1, 1) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(res.instance.p(2, 1) == doctest::Approx(0.4).epsilon(1e-12));
  ArmValue best = single_type_optimal_arm(res.instance);
  CHECK(best.category == 1);  // equal values; ties to the first arm

  // Identical users cannot be split into two nonempty clusters.
  RngStream rng2(4);
  CHECK_THROWS_AS(build_semi_synthetic(table, {"A", "B"}, 2, rng2),
                  std::runtime_error);
}

TEST_CASE("retention rule drops users missing a category") {
  RatingsTable table = two_population_table(10, 10);
  // Three extra users rate only genre A.
  for (std::int64_t uid = 100; uid < 103; ++uid)
    table.records.push_back({uid, 1, 4.0, "A"});
  RngStream rng(12);
  SemiSyntheticResult res = build_semi_synthetic(table, {"A", "B"}, 2, rng);
  CHECK(res.retained_users == 20);
}

TEST_CASE("too few users is an error") {
  RatingsTable table = two_population_table(4, 4);
  RngStream rng(9);
  CHECK_THROWS_AS(build_semi_synthetic(table, {"A", "B"}, 1, rng),
                  std::invalid_argument);
}

TEST_CASE("online ratings mode draws from real rating pools") {
  RatingsTable table = two_population_table(10, 10);
  RatingsPools pools = build_ratings_pools(table, {"A", "B"});
  REQUIRE(pools.click_probs.size() == 20);
  for (const auto& user : pools.click_probs) {
    REQUIRE(user.size() == 2);
    for (const auto& pool : user) CHECK_FALSE(pool.empty());
  }
  CHECK(pools.depart_prob == 1.0);

  RngStream rng(21);
  for (int t = 0; t < 200; ++t) {
    EpisodeResult ep = run_episode_ratings(pools, Policy::threshold2(2, 3), rng);
    CHECK(ep.length >= 1);
    CHECK(ep.length == ep.clicks + 1);  // certain departure on no-click
  }

  // Deterministic under the stream seed.
  RngStream r1(5), r2(5);
  EpisodeResult e1 = run_episode_ratings(pools, Policy::fixed(1), r1);
  EpisodeResult e2 = run_episode_ratings(pools, Policy::fixed(1), r2);
  CHECK(e1.clicks == e2.clicks);
  CHECK(e1.length == e2.length);

  // Users who never rated genre B are excluded from the pools.
  RatingsTable partial;
  partial.scale_max = 5.0;
  partial.records.push_back({1, 1, 4.0, "A"});
  CHECK_THROWS_AS(build_ratings_pools(partial, {"A", "B"}),
                  std::invalid_argument);
}
