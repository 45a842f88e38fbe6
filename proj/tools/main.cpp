// Command-line harness: planning, learning, simulation, verification
// oracles, and instance generation for departing-user bandits.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "depbandits/core.hpp"
#include "depbandits/dp_planner.hpp"
#include "depbandits/environment.hpp"
#include "depbandits/instances.hpp"
#include "depbandits/learning.hpp"
#include "depbandits/oracle.hpp"
#include "depbandits/planning.hpp"

namespace db = depbandits;

namespace {

// Full-precision formatting for CSV output (>= 15 significant digits).
std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string output_dir() {
  const char* dir = std::getenv("DEPBANDITS_OUT");
  return dir && *dir ? dir : ".";
}

std::string resolve_out(const std::string& flag_value, const std::string& name) {
  return flag_value.empty() ? output_dir() + "/" + name : flag_value;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write file: " + path);
  return f;
}

std::vector<std::string> split_list(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, delim))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

std::string join_actions(const std::vector<int>& actions) {
  std::ostringstream os;
  for (std::size_t i = 0; i < actions.size(); ++i)
    os << (i ? "," : "") << actions[i];
  return os.str();
}

db::StructureKind parse_structure(const std::string& s) {
  if (s == "dr" || s == "dominant-row" || s == "DominantRow")
    return db::StructureKind::DominantRow;
  if (s == "dc" || s == "dominant-column" || s == "DominantColumn")
    return db::StructureKind::DominantColumn;
  if (s == "dd" || s == "dominant-diagonal" || s == "DominantDiagonal")
    return db::StructureKind::DominantDiagonal;
  throw std::invalid_argument("unknown structure class: " + s +
                              " (expected dr, dc or dd)");
}

// Config file support: JSON with flat keys matching long option names,
// or keys nested under the subcommand name.  Flags given on the
// command line win because config-derived tokens are injected first
// and options take the last value.
std::vector<std::string> config_tokens(const std::string& path,
                                       const std::string& subcommand) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed config file " + path + ": " + e.what());
  }
  if (j.contains(subcommand) && j.at(subcommand).is_object())
    j = j.at(subcommand);
  std::vector<std::string> tokens;
  for (const auto& [key, value] : j.items()) {
    if (value.is_object() || value.is_array()) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back("--" + key);
      continue;
    }
    tokens.push_back("--" + key);
    tokens.push_back(value.is_string() ? value.get<std::string>() : value.dump());
  }
  return tokens;
}

// --- plan ----------------------------------------------------------------

struct PlanArgs {
  std::string instance_path;
  bool dp = false;
  int horizon = 60;
  double belief = -1.0;  // <0 means: use the instance prior
};

int run_plan(const PlanArgs& args) {
  db::Instance inst = db::load_instance(args.instance_path);
  std::optional<double> belief;
  if (args.belief >= 0.0) belief = args.belief;

  if (args.dp) {
    db::DpPlan plan = db::dp_plan(inst, args.horizon, belief);
    std::cout << "planner: finite-horizon dynamic program\n"
              << "horizon: " << args.horizon << "\n"
              << "actions: " << join_actions(plan.actions) << "\n"
              << "value: " << fmt(plan.value) << "\n\n"
              << "horizon,value,actions\n"
              << args.horizon << ',' << fmt(plan.value) << ",\""
              << join_actions(plan.actions) << "\"\n";
    return 0;
  }

  if (inst.num_types == 1) {
    db::ArmValue best = db::single_type_optimal_arm(inst);
    db::Policy policy = db::Policy::fixed(best.category);
    std::cout << "structure: SingleType\n"
              << "policy: " << db::to_string(policy) << "\n"
              << "value: " << fmt(best.value) << "\n\n"
              << "structure,policy,value\n"
              << "SingleType," << db::csv_label(policy) << ','
              << fmt(best.value) << "\n";
    return 0;
  }

  if (inst.num_types == 2 && inst.num_categories == 2 &&
      !inst.all_departures_one()) {
    // Exact threshold planning needs certain departures; the structure
    // classification itself does not.
    db::StructureClass sc = db::normalize_2x2(inst).structure;
    std::cout << "structure: " << db::to_string(sc.kind)
              << (sc.swapped_categories ? " (categories swapped)" : "")
              << (sc.swapped_types ? " (types swapped)" : "") << "\n"
              << "note: departure probabilities below 1; structure "
                 "classification only (exact planning needs certain "
                 "departures)\n\n"
              << "structure,policy,value\n"
              << db::to_string(sc.kind) << ",,\n";
    return 0;
  }

  db::PlanResult res = db::optimal_policy_2x2(inst);
  std::cout << "structure: " << db::to_string(res.structure.kind)
            << (res.structure.swapped_categories ? " (categories swapped)" : "")
            << (res.structure.swapped_types ? " (types swapped)" : "") << "\n";
  if (res.saddle)
    std::cout << "saddle: N~ = " << fmt(res.saddle->n_tilde)
              << ", N* = " << fmt(res.saddle->n_star)
              << (res.saddle->capped ? " (capped)" : "") << "\n";
  std::cout << "candidates:\n";
  for (const auto& c : res.candidates)
    std::cout << "  " << db::to_string(c.policy) << " -> " << fmt(c.value) << "\n";
  std::cout << "policy: " << db::to_string(res.policy) << "\n"
            << "value: " << fmt(res.value) << "\n\n";

  std::cout << "structure,policy,value\n"
            << db::to_string(res.structure.kind) << ','
            << db::csv_label(res.policy) << ',' << fmt(res.value) << "\n"
            << "candidate,value\n";
  for (const auto& c : res.candidates)
    std::cout << db::csv_label(c.policy) << ',' << fmt(c.value) << "\n";
  return 0;
}

// --- simulate ------------------------------------------------------------

struct SimulateArgs {
  std::string instance_path;
  std::string policy_spec = "1";
  std::int64_t episodes = 1000;
  std::uint64_t seed = 1;
  std::string out;
  std::int64_t max_episode_length = db::kMaxEpisodeLength;
  // online ratings mode
  std::string ratings_path, items_path, genres;
  double scale_max = 5.0;
  double epsilon = 0.1;
};

int run_simulate(const SimulateArgs& args) {
  db::Policy policy = db::policy_from_string(args.policy_spec);
  db::StreamResult trace;
  if (!args.ratings_path.empty()) {
    db::RatingsConfig cfg;
    cfg.scale_max = args.scale_max;
    cfg.epsilon = args.epsilon;
    auto genres = split_list(args.genres, ',');
    db::RatingsTable table =
        db::load_ratings(args.ratings_path, args.items_path, genres, cfg);
    db::RatingsPools pools = db::build_ratings_pools(table, genres, cfg);
    for (std::int64_t t = 0; t < args.episodes; ++t) {
      db::RngStream rng(args.seed, static_cast<std::uint64_t>(t));
      trace.policy_ids.push_back(0);
      trace.episodes.push_back(db::run_episode_ratings(pools, policy, rng,
                                                       args.max_episode_length));
    }
  } else {
    db::Instance inst = db::load_instance(args.instance_path);
    db::validate_policy(policy, inst);
    trace = db::run_policy_stream(inst, policy, args.episodes, args.seed,
                                  args.max_episode_length);
  }

  double n = static_cast<double>(args.episodes);
  double mean = trace.total_return() / n;
  double sq = 0.0;
  for (const auto& ep : trace.episodes) {
    double d = static_cast<double>(ep.clicks) - mean;
    sq += d * d;
  }
  double stderr_mean = args.episodes > 1 ? std::sqrt(sq / (n - 1.0) / n) : 0.0;

  std::string out_path = resolve_out(args.out, "episodes.csv");
  auto f = open_out(out_path);
  db::write_episodes_csv(f, trace);
  std::cout << "policy: " << db::to_string(policy) << "\n"
            << "episodes: " << args.episodes << "\n"
            << "mean_return: " << fmt(mean) << "\n"
            << "stderr: " << fmt(stderr_mean) << "\n"
            << "wrote: " << out_path << "\n";
  return 0;
}

// --- learn ---------------------------------------------------------------

struct LearnArgs {
  std::string instance_path;
  std::int64_t T = 10000;
  int seeds = 1;
  std::uint64_t seed_base = 1;
  std::string policy_set = "threshold";
  int horizon = -1;  // <0: derive from T and epsilon
  double epsilon_override = -1.0;
  std::string out, per_seed_out;
};

int run_learn(const LearnArgs& args) {
  db::Instance inst = db::load_instance(args.instance_path);
  double eps = args.epsilon_override > 0.0 ? args.epsilon_override : inst.epsilon;
  db::SubExpParams params = db::subexp_params(eps);

  std::vector<db::Policy> policies;
  if (args.policy_set == "fixed") {
    policies = db::build_fixed_arm_policy_set(inst.num_categories);
  } else if (args.policy_set == "threshold") {
    int H = args.horizon >= 0 ? args.horizon : db::horizon_for_T(args.T, eps);
    policies = db::build_threshold_policy_set(H);
  } else {
    throw std::invalid_argument("unknown policy set: " + args.policy_set +
                                " (expected fixed or threshold)");
  }
  for (const auto& p : policies) db::validate_policy(p, inst);

  auto v_star = db::exact_optimal_value(inst);
  if (!v_star)
    throw std::runtime_error(
        "no exact planner covers this instance family; regret baseline unavailable");

  std::vector<std::vector<double>> curves;
  for (int s = 0; s < args.seeds; ++s) {
    db::UcbHybrid learner(policies, args.T, params);
    db::StreamResult trace = db::run_stream(
        inst, learner, args.T, args.seed_base + static_cast<std::uint64_t>(s));
    curves.push_back(db::regret_curve(trace, *v_star));
  }
  db::CurveAverage avg = db::average_curves(curves);

  std::string out_path = resolve_out(args.out, "learn_regret.csv");
  auto f = open_out(out_path);
  f << "t,cum_regret_mean,cum_regret_stderr\n";
  for (std::size_t t = 0; t < avg.mean.size(); ++t)
    f << (t + 1) << ',' << fmt(avg.mean[t]) << ',' << fmt(avg.stderr_mean[t])
      << '\n';

  if (!args.per_seed_out.empty()) {
    auto g = open_out(args.per_seed_out);
    g << "t,seed,cum_regret\n";
    for (std::size_t s = 0; s < curves.size(); ++s)
      for (std::size_t t = 0; t < curves[s].size(); ++t)
        g << (t + 1) << ',' << (args.seed_base + s) << ',' << fmt(curves[s][t])
          << '\n';
  }

  std::cout << "policies: " << policies.size() << "\n"
            << "v_star: " << fmt(*v_star) << "\n"
            << "mean_final_regret: " << fmt(avg.mean.back()) << "\n"
            << "wrote: " << out_path << "\n";
  return 0;
}

// --- oracle --------------------------------------------------------------

struct OracleArgs {
  std::string instance_path;
  std::string policy_spec;
  int horizon = 60;
  std::int64_t mc_episodes = 100000;
  std::uint64_t seed = 1;
};

int run_oracle(const OracleArgs& args) {
  db::Instance inst = db::load_instance(args.instance_path);
  bool grid_applies = inst.num_types == 2 && inst.num_categories == 2 &&
                      inst.all_departures_one();

  std::optional<db::GridSearchResult> grid;
  if (grid_applies) {
    grid = db::grid_search_threshold(inst, args.horizon);
    std::cout << "grid_best_policy: " << db::to_string(grid->policy) << "\n"
              << "grid_best_value: " << fmt(grid->value) << "\n";
  }

  db::Policy policy;
  if (!args.policy_spec.empty()) {
    policy = db::policy_from_string(args.policy_spec);
  } else if (grid) {
    policy = grid->policy;
  } else {
    throw std::invalid_argument(
        "--policy is required when the instance is not 2x2 with departures 1");
  }
  db::validate_policy(policy, inst);
  std::cout << "policy: " << db::to_string(policy) << "\n";

  db::MonteCarloEstimate mc =
      db::monte_carlo_value(inst, policy, args.mc_episodes, args.seed);
  std::cout << "mc_mean: " << fmt(mc.mean) << "\n"
            << "mc_stderr: " << fmt(mc.stderr_mean) << "\n";

  if (inst.all_departures_one()) {
    double bf = db::brute_force_value(inst, policy, args.horizon);
    std::cout << "brute_force_h" << args.horizon << ": " << fmt(bf) << "\n";
  }
  int h_general = std::min(args.horizon, db::kMaxEnumerationHorizon);
  double bfg = db::brute_force_value_general(inst, policy, h_general);
  std::cout << "enumeration_h" << h_general << ": " << fmt(bfg) << "\n";
  return 0;
}

// --- gen -----------------------------------------------------------------

struct GenArgs {
  bool random = false;
  bool from_ratings = false;
  int K = 2, M = 2;
  double epsilon = 0.2;
  double margin = db::kDefaultClickMargin;
  std::uint64_t seed = 1;
  std::string structure;
  bool departures_one = false;
  std::string ratings_path, items_path, genres;
  double scale_max = 5.0;
  std::string out;
};

int run_gen(const GenArgs& args) {
  if (args.random == args.from_ratings)
    throw std::invalid_argument("choose exactly one of --random / --from-ratings");

  db::Instance inst;
  if (args.random) {
    db::RngStream rng(args.seed);
    std::optional<db::StructureKind> target;
    if (!args.structure.empty()) target = parse_structure(args.structure);
    inst = args.departures_one
               ? db::random_instance_all_departures_one(args.K, args.M, args.epsilon,
                                                        rng, target, args.margin)
               : db::random_instance(args.K, args.M, args.epsilon, rng, target,
                                     args.margin);
  } else {
    db::RatingsConfig cfg;
    cfg.scale_max = args.scale_max;
    cfg.epsilon = args.epsilon;
    cfg.margin = args.margin;
    auto genres = split_list(args.genres, ',');
    db::RatingsTable table =
        db::load_ratings(args.ratings_path, args.items_path, genres, cfg);
    for (const auto& line : table.skip_report) std::cout << "skip: " << line << "\n";
    db::RngStream rng(args.seed);
    db::SemiSyntheticResult built =
        db::build_semi_synthetic(table, genres, args.M, rng, cfg);
    inst = built.instance;
    std::cout << "retained_users: " << built.retained_users << "\n";
  }

  std::string out_path = resolve_out(args.out, "instance.json");
  db::save_instance(inst, out_path);
  std::cout << "M: " << inst.num_types << "\nK: " << inst.num_categories
            << "\nepsilon: " << fmt(inst.epsilon) << "\nwrote: " << out_path
            << "\n";
  return 0;
}

// --- experiment ----------------------------------------------------------

struct ExperimentArgs {
  std::string instance_path;
  std::int64_t T = 100000;
  int seeds = 20;
  std::uint64_t seed_base = 1;
  std::string out_dir;
};

int run_experiment(const ExperimentArgs& args) {
  db::Instance inst = db::load_instance(args.instance_path);
  db::detail::require(inst.num_types == 2 && inst.num_categories == 2 &&
                          inst.all_departures_one(),
                      "experiment: instance must be 2x2 with departures 1");
  db::SubExpParams params = db::subexp_params(inst.epsilon);
  double b = inst.q(1);
  double v_star = db::optimal_policy_2x2(inst).value;

  int H = db::horizon_for_T(args.T, inst.epsilon);
  std::vector<db::Policy> full_set = db::build_threshold_policy_set(H);
  std::vector<db::Policy> fixed_set = db::build_fixed_arm_policy_set(2);
  auto values_of = [&](const std::vector<db::Policy>& ps) {
    std::vector<double> v;
    for (const auto& p : ps) v.push_back(db::policy_value_exact(inst, p, b));
    return v;
  };
  std::vector<double> full_values = values_of(full_set);
  std::vector<double> fixed_values = values_of(fixed_set);

  std::string dir = args.out_dir.empty() ? output_dir() : args.out_dir;
  auto summary = open_out(dir + "/experiment_summary.csv");
  summary << "learner,seed,final_regret,half_regret,doubling_ratio,"
             "expected_final,expected_half,expected_ratio,best_share_last_decile\n";

  struct Agg {
    std::vector<std::vector<double>> curves;
    double final_sum = 0, half_sum = 0, ratio_sum = 0;
    double efinal_sum = 0, ehalf_sum = 0, eratio_sum = 0, share_sum = 0;
  };
  auto run_learner = [&](const char* name, const std::vector<db::Policy>& ps,
                         const std::vector<double>& vals, Agg& agg) {
    for (int s = 0; s < args.seeds; ++s) {
      std::uint64_t seed = args.seed_base + static_cast<std::uint64_t>(s);
      db::UcbRunSummary r =
          db::run_ucb_seed(inst, ps, vals, v_star, args.T, params, seed);
      std::size_t half = r.realized_regret.size() / 2 - 1,
                  last = r.realized_regret.size() - 1;
      double fin = r.realized_regret[last], hal = r.realized_regret[half];
      double efin = r.expected_regret[last], ehal = r.expected_regret[half];
      double share = static_cast<double>(r.best_pulls_last_decile) /
                     static_cast<double>(r.episodes_last_decile);
      summary << name << ',' << seed << ',' << fmt(fin) << ',' << fmt(hal) << ','
              << fmt(fin / hal) << ',' << fmt(efin) << ',' << fmt(ehal) << ','
              << fmt(efin / ehal) << ',' << fmt(share) << '\n';
      agg.final_sum += fin;
      agg.half_sum += hal;
      agg.ratio_sum += fin / hal;
      agg.efinal_sum += efin;
      agg.ehalf_sum += ehal;
      agg.eratio_sum += efin / ehal;
      agg.share_sum += share;
      agg.curves.push_back(std::move(r.realized_regret));
    }
    double k = static_cast<double>(args.seeds);
    summary << name << ",mean," << fmt(agg.final_sum / k) << ','
            << fmt(agg.half_sum / k) << ',' << fmt(agg.ratio_sum / k) << ','
            << fmt(agg.efinal_sum / k) << ',' << fmt(agg.ehalf_sum / k) << ','
            << fmt(agg.eratio_sum / k) << ',' << fmt(agg.share_sum / k) << '\n';
  };

  Agg full_agg, fixed_agg;
  run_learner("full", full_set, full_values, full_agg);
  run_learner("fixed", fixed_set, fixed_values, fixed_agg);

  auto write_curve = [&](const char* name, const Agg& agg) {
    db::CurveAverage avg = db::average_curves(agg.curves);
    auto f = open_out(dir + std::string("/experiment_") + name + "_regret.csv");
    f << "t,cum_regret_mean,cum_regret_stderr\n";
    for (std::size_t t = 0; t < avg.mean.size(); ++t)
      f << (t + 1) << ',' << fmt(avg.mean[t]) << ',' << fmt(avg.stderr_mean[t])
        << '\n';
  };
  write_curve("full", full_agg);
  write_curve("fixed", fixed_agg);

  double k = static_cast<double>(args.seeds);
  std::cout << "v_star: " << fmt(v_star) << "\n"
            << "full_mean_expected_ratio: " << fmt(full_agg.eratio_sum / k) << "\n"
            << "fixed_mean_expected_ratio: " << fmt(fixed_agg.eratio_sum / k) << "\n"
            << "wrote: " << dir << "/experiment_{summary,full_regret,fixed_regret}.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"departing-user bandit planning and learning toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  PlanArgs plan_args;
  auto* plan_cmd = app.add_subcommand("plan", "compute an optimal policy");
  plan_cmd->add_option("--instance", plan_args.instance_path, "instance JSON file")
      ->required();
  plan_cmd->add_flag("--dp", plan_args.dp, "use the finite-horizon dynamic program");
  plan_cmd->add_option("--horizon", plan_args.horizon, "dp horizon");
  plan_cmd->add_option("--belief", plan_args.belief,
                       "override the first-type prior weight (dp mode)");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "roll out a fixed policy");
  sim_cmd->add_option("--instance", sim_args.instance_path, "instance JSON file");
  sim_cmd->add_option("--policy", sim_args.policy_spec,
                      "policy spec: 2 | fix:2 | thr:2:6 | seq:2-1:2");
  sim_cmd->add_option("--episodes", sim_args.episodes, "episode count");
  sim_cmd->add_option("--seed", sim_args.seed, "rng seed");
  sim_cmd->add_option("--out", sim_args.out, "episodes CSV path");
  sim_cmd->add_option("--max-episode-length", sim_args.max_episode_length,
                      "safety guard on episode length");
  sim_cmd->add_option("--ratings", sim_args.ratings_path,
                      "ratings CSV (online mode, replaces --instance)");
  sim_cmd->add_option("--items", sim_args.items_path, "items CSV (online mode)");
  sim_cmd->add_option("--genres", sim_args.genres,
                      "comma-separated genre list (online mode)");
  sim_cmd->add_option("--scale-max", sim_args.scale_max, "rating scale maximum");
  sim_cmd->add_option("--epsilon", sim_args.epsilon, "click margin (online mode)");

  LearnArgs learn_args;
  auto* learn_cmd = app.add_subcommand("learn", "run the UCB learner");
  learn_cmd->add_option("--instance", learn_args.instance_path, "instance JSON file")
      ->required();
  learn_cmd->add_option("--T", learn_args.T, "episodes per run");
  learn_cmd->add_option("--seeds", learn_args.seeds, "number of independent runs");
  learn_cmd->add_option("--seed-base", learn_args.seed_base, "first seed");
  learn_cmd->add_option("--policy-set", learn_args.policy_set,
                        "fixed | threshold");
  learn_cmd->add_option("--horizon", learn_args.horizon,
                        "threshold switch-point bound (default: derived from T)");
  learn_cmd->add_option("--epsilon-override", learn_args.epsilon_override,
                        "use this margin instead of the instance's");
  learn_cmd->add_option("--out", learn_args.out, "aggregate regret CSV path");
  learn_cmd->add_option("--per-seed-out", learn_args.per_seed_out,
                        "per-seed regret CSV path");

  OracleArgs oracle_args;
  auto* oracle_cmd = app.add_subcommand("oracle", "independent verification values");
  oracle_cmd->add_option("--instance", oracle_args.instance_path, "instance JSON file")
      ->required();
  oracle_cmd->add_option("--policy", oracle_args.policy_spec,
                         "policy spec (default: grid-search best)");
  oracle_cmd->add_option("--horizon", oracle_args.horizon,
                         "grid-search bound / truncation horizon");
  oracle_cmd->add_option("--mc-episodes", oracle_args.mc_episodes,
                         "Monte Carlo episode count");
  oracle_cmd->add_option("--seed", oracle_args.seed, "rng seed");

  GenArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen", "generate an instance file");
  gen_cmd->add_flag("--random", gen_args.random, "random synthetic instance");
  gen_cmd->add_flag("--from-ratings", gen_args.from_ratings,
                    "semi-synthetic instance from ratings data");
  gen_cmd->add_option("--K", gen_args.K, "categories");
  gen_cmd->add_option("--M", gen_args.M, "types");
  gen_cmd->add_option("--epsilon", gen_args.epsilon, "click margin");
  gen_cmd->add_option("--margin", gen_args.margin, "lower clamp for probabilities");
  gen_cmd->add_option("--seed", gen_args.seed, "rng seed");
  gen_cmd->add_option("--structure", gen_args.structure,
                      "target structure class: dr | dc | dd (2x2 only)");
  gen_cmd->add_flag("--departures-one", gen_args.departures_one,
                    "force all departure probabilities to 1");
  gen_cmd->add_option("--ratings", gen_args.ratings_path, "ratings CSV");
  gen_cmd->add_option("--items", gen_args.items_path, "items CSV");
  gen_cmd->add_option("--genres", gen_args.genres, "comma-separated genre list");
  gen_cmd->add_option("--scale-max", gen_args.scale_max, "rating scale maximum");
  gen_cmd->add_option("--out", gen_args.out, "output instance path");

  ExperimentArgs exp_args;
  auto* exp_cmd = app.add_subcommand(
      "experiment", "multi-seed regret study: threshold-set vs fixed-arm learner");
  exp_cmd->add_option("--instance", exp_args.instance_path, "instance JSON file")
      ->required();
  exp_cmd->add_option("--T", exp_args.T, "episodes per run");
  exp_cmd->add_option("--seeds", exp_args.seeds, "number of seeds per learner");
  exp_cmd->add_option("--seed-base", exp_args.seed_base, "first seed");
  exp_cmd->add_option("--out-dir", exp_args.out_dir, "output directory");

  // Extract "--config FILE" (after the subcommand) and inject its
  // key/value pairs as tokens so explicit flags override them.
  std::vector<std::string> tokens;
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    std::string t = argv[i];
    if (t == "--config" && i + 1 < argc) {
      config_path = argv[++i];
    } else if (t.rfind("--config=", 0) == 0) {
      config_path = t.substr(9);
    } else {
      tokens.push_back(t);
    }
  }
  try {
    if (!config_path.empty() && !tokens.empty()) {
      auto extra = config_tokens(config_path, tokens.front());
      tokens.insert(tokens.begin() + 1, extra.begin(), extra.end());
    }
    std::vector<const char*> cargv{argv[0]};
    for (const auto& t : tokens) cargv.push_back(t.c_str());
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return e.get_exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (plan_cmd->parsed()) return run_plan(plan_args);
    if (sim_cmd->parsed()) return run_simulate(sim_args);
    if (learn_cmd->parsed()) return run_learn(learn_args);
    if (oracle_cmd->parsed()) return run_oracle(oracle_args);
    if (gen_cmd->parsed()) return run_gen(gen_args);
    if (exp_cmd->parsed()) return run_experiment(exp_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
