// Command-line front end: solve, collect, train, eval, reproduce.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "zsmg/dp.hpp"
#include "zsmg/features.hpp"
#include "zsmg/flow.hpp"
#include "zsmg/harness.hpp"
#include "zsmg/soccer.hpp"
#include "zsmg/store.hpp"

using namespace zsmg;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Relative outputs land in $ZSMG_OUT_DIR when it is set.
fs::path resolve_out(const std::string& path) {
  fs::path p(path);
  const char* base = std::getenv("ZSMG_OUT_DIR");
  if (base && *base && p.is_relative()) return fs::path(base) / p;
  return p;
}

fs::path resolve_write(const std::string& path) {
  const fs::path p = resolve_out(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw StoreError("cannot open config file " + path);
  json j;
  in >> j;
  if (!j.is_object()) throw StoreError("config file must hold a JSON object");
  return j;
}

template <typename T>
void override_from(const json& cfg, const char* key, T& var) {
  if (cfg.contains(key)) var = cfg.at(key).get<T>();
}

struct EnvArgs {
  std::string env;  // "soccer" or "flow"
  int rows = 4;
  int cols = 4;
  int buffer = 100;
  double gamma = 0.0;  // 0 = per-environment default
};

void add_env_flags(CLI::App* cmd, EnvArgs& args) {
  cmd->add_option("--env", args.env, "environment: soccer or flow");
  cmd->add_option("--rows", args.rows, "soccer grid rows");
  cmd->add_option("--cols", args.cols, "soccer grid columns");
  cmd->add_option("--buffer", args.buffer, "flow buffer size");
  cmd->add_option("--gamma", args.gamma, "discount factor");
}

void override_env(const json& cfg, EnvArgs& args) {
  override_from(cfg, "env", args.env);
  override_from(cfg, "rows", args.rows);
  override_from(cfg, "cols", args.cols);
  override_from(cfg, "buffer", args.buffer);
  override_from(cfg, "gamma", args.gamma);
}

SoccerConfig soccer_config(const EnvArgs& args) {
  return {args.rows, args.cols, args.gamma > 0 ? args.gamma : 0.9};
}

FlowParams flow_params(const EnvArgs& args) {
  FlowParams p;
  p.buffer_size = args.buffer;
  if (args.gamma > 0) p.discount = args.gamma;
  return p;
}

std::unique_ptr<GameEnv> make_env(const EnvArgs& args) {
  if (args.env == "soccer")
    return std::make_unique<SoccerEnv>(soccer_config(args));
  if (args.env == "flow") return std::make_unique<FlowEnv>(flow_params(args));
  throw StoreError("unknown environment '" + args.env +
                   "' (expected soccer or flow)");
}

// Reconstructs environment flags from a corpus env id like "soccer-4x4" or
// "flow-b100".
EnvArgs env_from_id(const std::string& id, double gamma) {
  EnvArgs args;
  args.gamma = gamma;
  if (id.rfind("soccer-", 0) == 0) {
    args.env = "soccer";
    if (std::sscanf(id.c_str(), "soccer-%dx%d", &args.rows, &args.cols) != 2)
      throw StoreError("cannot parse grid size from env id '" + id + "'");
    return args;
  }
  if (id.rfind("flow-b", 0) == 0) {
    args.env = "flow";
    if (std::sscanf(id.c_str(), "flow-b%d", &args.buffer) != 1)
      throw StoreError("cannot parse buffer size from env id '" + id + "'");
    return args;
  }
  throw StoreError("unknown env id '" + id + "'");
}

std::shared_ptr<const FeatureMap> make_features(const std::string& name,
                                                const EnvArgs& args) {
  if (name == "basic")
    return std::make_shared<SoccerFeatures>(soccer_config(args), false);
  if (name == "extended")
    return std::make_shared<SoccerFeatures>(soccer_config(args), true);
  if (name == "poly3") return std::make_shared<FlowFeatures>(flow_params(args));
  throw StoreError("unknown feature set '" + name +
                   "' (expected basic, extended, or poly3)");
}

std::shared_ptr<const FeatureMap> features_for_weights(const WeightVector& w,
                                                       const EnvArgs& args) {
  if (w.features == "soccer-basic") return make_features("basic", args);
  if (w.features == "soccer-extended") return make_features("extended", args);
  if (w.features == "flow-poly3") return make_features("poly3", args);
  int s, a, o;
  if (std::sscanf(w.features.c_str(), "indicator-%dx%dx%d", &s, &a, &o) == 3)
    return std::make_shared<IndicatorFeatures>(s, a, o);
  throw StoreError("unknown feature id '" + w.features + "' in weights file");
}

TabularGame exact_model_for(const EnvArgs& args) {
  if (args.env == "soccer") return soccer_exact_model(soccer_config(args));
  return flow_exact_model(flow_params(args));
}

std::shared_ptr<Player> make_player(const std::string& spec,
                                    const EnvArgs& args,
                                    const std::string& feature_set) {
  const auto env = make_env(args);
  if (spec == "random")
    return std::make_shared<RandomPlayer>(env->n_agent_actions(),
                                          env->n_opp_actions());
  if (spec == "exact") {
    const TabularGame game = exact_model_for(args);
    return std::make_shared<ExactPlayer>(policy_iteration(game).q, "exact");
  }
  if (spec == "benchmark") {
    const SoccerConfig cfg = soccer_config(args);
    auto features = make_features(feature_set, args);
    const WeightVector w =
        build_benchmark_player(cfg, *features, cfg.discount);
    return std::make_shared<WeightsPlayer>(w, features, kSoccerActions,
                                           kSoccerActions, "benchmark");
  }
  if (spec.rfind("weights:", 0) == 0) {
    const WeightVector w = read_weights(resolve_out(spec.substr(8)));
    auto features = features_for_weights(w, args);
    return std::make_shared<WeightsPlayer>(w, features,
                                           env->n_agent_actions(),
                                           env->n_opp_actions(), "weights");
  }
  if (spec.rfind("benchmark:", 0) == 0) {
    const WeightVector w = read_weights(resolve_out(spec.substr(10)));
    auto features = features_for_weights(w, args);
    return std::make_shared<WeightsPlayer>(w, features,
                                           env->n_agent_actions(),
                                           env->n_opp_actions(), "benchmark");
  }
  throw StoreError("unknown player spec '" + spec + "'");
}

WeightVector q_as_weights(const TabularGame& game, const QTable& q,
                          const std::string& env_id) {
  IndicatorFeatures features(game.n_states, game.n_agent_actions,
                             game.n_opp_actions);
  WeightVector w;
  w.w = Vector::Zero(features.dimension());
  for (size_t i = 0; i < q.values.size(); ++i)
    w.w[static_cast<int>(i)] = q.values[i];
  w.features = features.id();
  w.gamma = game.discount;
  w.env = env_id;
  return w;
}

// Threshold summary of the per-state minimax strategies of a solved flow
// game: one line per player listing deterministic runs and mixed states.
void print_flow_policy(const TabularGame& game, const QTable& q) {
  for (const char* who : {"router", "server"}) {
    std::string line;
    int mixed = 0;
    int prev_action = -1;
    int run_start = 0;
    std::vector<int> actions(game.n_states);
    for (int s = 0; s < game.n_states; ++s) {
      Matrix m(game.n_agent_actions, game.n_opp_actions);
      for (int a = 0; a < game.n_agent_actions; ++a)
        for (int o = 0; o < game.n_opp_actions; ++o) m(a, o) = q.at(s, a, o);
      Vector strat;
      if (std::string(who) == "router") {
        strat = solve_maximin(m).strategy;
      } else {
        strat = solve_maximin((-m.transpose()).eval()).strategy;
      }
      actions[s] = strat[1] > 0.999 ? 1 : strat[1] < 0.001 ? 0 : -2;
      if (actions[s] == -2) ++mixed;
    }
    for (int s = 0; s <= game.n_states; ++s) {
      const int a = s < game.n_states ? actions[s] : -9;
      if (a != prev_action) {
        if (s > 0) {
          line += std::to_string(run_start) + "-" + std::to_string(s - 1) +
                  ":" +
                  (prev_action == -2 ? "mixed"
                                     : (prev_action == 1 ? "high" : "low")) +
                  " ";
        }
        prev_action = a;
        run_start = s;
      }
    }
    std::printf("%s policy: %s(mixed states: %d)\n", who, line.c_str(), mixed);
  }
}

int cmd_solve(const std::string& game_file, EnvArgs env_args,
              std::string method, double tol, int max_iter,
              const std::string& out, const json& cfg) {
  override_env(cfg, env_args);
  override_from(cfg, "method", method);
  override_from(cfg, "tol", tol);
  override_from(cfg, "max_iter", max_iter);

  TabularGame game;
  std::string env_id;
  if (!game_file.empty()) {
    game = read_game(resolve_out(game_file));
    env_id = "file:" + game_file;
  } else {
    game = exact_model_for(env_args);
    env_id = make_env(env_args)->id();
  }

  QTable q;
  int iterations = 0;
  if (method == "pi") {
    const PolicyIterationResult result = policy_iteration(game, tol);
    q = result.q;
    iterations = result.outer_iterations;
  } else if (method == "vi") {
    const ValueIterationResult result = value_iteration(game, tol, max_iter);
    q = result.q;
    iterations = result.iterations;
  } else {
    throw StoreError("unknown method '" + method + "' (expected vi or pi)");
  }
  const double residual = bellman_residual(game, q);
  std::printf("env=%s states=%d live_q_entries=%zu method=%s iterations=%d "
              "residual=%.3e\n",
              env_id.c_str(), game.n_states, game.live_table_size(),
              method.c_str(), iterations, residual);
  std::printf("bound_fixed_point=%.3e bound_policy_loss=%.3e\n",
              bound_fixed_point_distance(residual, game.discount),
              bound_policy_loss(residual, game.discount));
  if (env_args.env == "flow" && game_file.empty()) print_flow_policy(game, q);
  if (!out.empty()) write_weights(resolve_write(out), q_as_weights(game, q, env_id));
  return 0;
}

int cmd_collect(EnvArgs env_args, int games, int max_steps,
                std::uint64_t seed, long long max_samples,
                const std::string& out, const json& cfg) {
  override_env(cfg, env_args);
  override_from(cfg, "games", games);
  override_from(cfg, "max_steps", max_steps);
  override_from(cfg, "seed", seed);
  override_from(cfg, "max_samples", max_samples);

  const auto env = make_env(env_args);
  const SampleCorpus corpus =
      collect_random_games(*env, games, max_steps, seed, max_samples);
  write_corpus(resolve_write(out), corpus);
  std::printf("env=%s episodes=%d samples=%zu out=%s\n", env->id().c_str(),
              corpus.episodes, corpus.samples.size(), out.c_str());
  return 0;
}

int cmd_train(const std::string& corpus_file, std::string feature_set,
              double gamma, int max_iter, double tol, double ridge,
              const std::string& out, const json& cfg) {
  std::string corpus_path = corpus_file;
  std::string features_name = feature_set;
  override_from(cfg, "corpus", corpus_path);
  override_from(cfg, "features", features_name);
  override_from(cfg, "gamma", gamma);
  override_from(cfg, "max_iter", max_iter);
  override_from(cfg, "tol", tol);
  override_from(cfg, "ridge", ridge);

  const SampleCorpus corpus = read_corpus(resolve_out(corpus_path));
  const EnvArgs env_args = env_from_id(corpus.env_id, gamma);
  const double discount =
      gamma > 0 ? gamma : (env_args.env == "soccer" ? 0.9 : 0.95);
  auto features = make_features(features_name, env_args);
  const LspiResult result =
      lspi(corpus, *features, discount, max_iter, tol, ridge);
  std::printf("env=%s samples=%zu k=%d iterations=%zu converged=%d "
              "final_delta=%.3e\n",
              corpus.env_id.c_str(), corpus.samples.size(),
              features->dimension(), result.weight_deltas.size(),
              result.converged ? 1 : 0,
              result.weight_deltas.empty() ? 0.0
                                           : result.weight_deltas.back());
  if (!out.empty()) write_weights(resolve_write(out), result.weights);
  return 0;
}

int cmd_eval(EnvArgs env_args, std::string player_a, std::string player_b,
             std::string feature_set, int games, int max_steps,
             int repetitions, std::uint64_t seed, int threads,
             const std::string& out, std::string experiment, const json& cfg) {
  override_env(cfg, env_args);
  override_from(cfg, "player_a", player_a);
  override_from(cfg, "player_b", player_b);
  override_from(cfg, "features", feature_set);
  override_from(cfg, "games", games);
  override_from(cfg, "max_steps", max_steps);
  override_from(cfg, "repetitions", repetitions);
  override_from(cfg, "seed", seed);
  override_from(cfg, "threads", threads);
  override_from(cfg, "experiment", experiment);

  const auto env = make_env(env_args);
  const auto a = make_player(player_a, env_args, feature_set);
  const auto b = make_player(player_b, env_args, feature_set);
  const TournamentResult result =
      tournament(*env, *a, *b, games, max_steps, repetitions, seed, threads);
  std::printf("%s vs %s on %s: games=%d reps=%d wins=%.1f draws=%.1f "
              "losses=%.1f score=%.3f",
              a->name().c_str(), b->name().c_str(), env->id().c_str(),
              result.games, result.repetitions, result.wins, result.draws,
              result.losses, result.total_discounted_score);
  if (result.score_ci_halfwidth)
    std::printf(" ci95=%.3f", *result.score_ci_halfwidth);
  std::printf("\n");
  if (!out.empty())
    append_results_row(resolve_write(out),
                       {experiment, 0, 0, result.wins, result.draws,
                        result.losses, result.total_discounted_score,
                        result.score_ci_halfwidth.value_or(0.0)});
  return 0;
}

void emit_curve(const std::vector<LearningCurveRow>& rows,
                const std::string& experiment, const fs::path& out) {
  for (const auto& row : rows)
    append_results_row(out, {experiment, row.corpus_games, row.repetition,
                             row.result.wins, row.result.draws,
                             row.result.losses,
                             row.result.total_discounted_score,
                             row.result.score_ci_halfwidth.value_or(0.0)});
}

int cmd_reproduce(std::string preset, std::string out_dir_flag,
                  std::uint64_t seed, int threads, const json& cfg) {
  override_from(cfg, "preset", preset);
  override_from(cfg, "out_dir", out_dir_flag);
  override_from(cfg, "seed", seed);
  override_from(cfg, "threads", threads);
  const fs::path out_dir = resolve_out(out_dir_flag);
  fs::create_directories(out_dir);
  const fs::path results = out_dir / "results.csv";

  if (preset == "soccer4") {
    const SoccerConfig cfg4{4, 4, 0.9};
    SoccerEnv env(cfg4);
    const TabularGame game = soccer_exact_model(cfg4);
    ExactPlayer optimal(policy_iteration(game).q, "optimal");
    auto features = std::make_shared<SoccerFeatures>(cfg4, false);
    LearningCurveProtocol protocol;
    protocol.max_episode_steps = 1000;
    protocol.max_samples = 40000;
    protocol.tournament_games = 1000;
    protocol.tournament_max_steps = 100;
    protocol.repetitions = 20;
    protocol.seed = seed;
    protocol.threads = threads;
    std::vector<int> sizes;
    for (int n = 0; n <= 500; n += 50) sizes.push_back(n);
    emit_curve(learning_curve(env, sizes, features, optimal, protocol),
               "soccer4", results);
  } else if (preset == "soccer8") {
    const SoccerConfig cfg8{8, 8, 0.8};
    SoccerEnv env(cfg8);
    auto features = std::make_shared<SoccerFeatures>(cfg8, false);
    const WeightVector bench = build_benchmark_player(cfg8, *features, 0.8);
    WeightsPlayer benchmark(bench, features, kSoccerActions, kSoccerActions,
                            "benchmark");
    write_weights(out_dir / "benchmark-8x8.json", bench);
    LearningCurveProtocol protocol;
    protocol.max_episode_steps = 1000;
    protocol.max_samples = 400000;
    protocol.tournament_games = 1000;
    protocol.tournament_max_steps = 300;
    protocol.repetitions = 10;
    protocol.seed = seed;
    protocol.threads = threads;
    std::vector<int> sizes;
    for (int n = 0; n <= 2000; n += 500) sizes.push_back(n);
    emit_curve(learning_curve(env, sizes, features, benchmark, protocol),
               "soccer8", results);
  } else if (preset == "soccer40-transfer") {
    const SoccerConfig cfg8{8, 8, 0.8};
    const SoccerConfig cfg40{40, 40, 0.8};
    SoccerEnv env8(cfg8);
    auto features8 = std::make_shared<SoccerFeatures>(cfg8, false);
    auto features40 = std::make_shared<SoccerFeatures>(cfg40, false);
    const WeightVector bench = build_benchmark_player(cfg8, *features8, 0.8);
    WeightsPlayer benchmark40(bench, features40, kSoccerActions,
                              kSoccerActions, "benchmark");
    for (int n = 500; n <= 2000; n += 500) {
      const SampleCorpus corpus = collect_random_games(
          env8, n, 1000, derive_seed(seed, static_cast<std::uint64_t>(n)),
          400000);
      const LspiResult trained = lspi(corpus, *features8, 0.8, 25, 1e-4);
      const TournamentResult res = cross_grid_transfer(
          trained.weights, cfg40, benchmark40, 1000, 300, 10,
          derive_seed(seed, static_cast<std::uint64_t>(n) + 1000), false,
          threads);
      append_results_row(results,
                         {"soccer40-transfer", n, 0, res.wins, res.draws,
                          res.losses, res.total_discounted_score,
                          res.score_ci_halfwidth.value_or(0.0)});
      std::printf("40x40 transfer, %d training games: score=%.3f\n", n,
                  res.total_discounted_score);
    }
  } else if (preset == "flow") {
    FlowParams params;
    FlowEnv env(params);
    const TabularGame game = flow_exact_model(params);
    const PolicyIterationResult sol = policy_iteration(game);
    ExactPlayer optimal(sol.q, "optimal");
    print_flow_policy(game, sol.q);
    auto features = std::make_shared<FlowFeatures>(params);
    LearningCurveProtocol protocol;
    protocol.max_episode_steps = 100;
    protocol.tournament_games = 1000;
    protocol.tournament_max_steps = 100;
    protocol.repetitions = 20;
    protocol.seed = seed;
    protocol.threads = threads;
    emit_curve(learning_curve(env, {0, 1, 5, 100}, features, optimal, protocol),
               "flow", results);
  } else {
    throw StoreError("unknown preset '" + preset + "'");
  }
  std::printf("results written to %s\n", results.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-sum Markov game solver and learner"};
  app.require_subcommand(1);

  std::string config_file;
  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("--config", config_file, "JSON file overriding flags")
      ->expected(1);
  app.add_option("--seed", seed, "master RNG seed");
  app.add_option("--threads", threads, "worker threads (0 = hardware)");

  // solve
  auto* solve = app.add_subcommand("solve", "exact DP on a game or environment");
  std::string game_file, method = "pi", solve_out;
  EnvArgs solve_env;
  double solve_tol = 1e-6;
  int solve_max_iter = 100000;
  solve->add_option("--game", game_file, "game file (zsmg-game JSON)");
  add_env_flags(solve, solve_env);
  solve->add_option("--method", method, "vi or pi");
  solve->add_option("--tol", solve_tol, "convergence tolerance");
  solve->add_option("--max-iter", solve_max_iter, "iteration cap");
  solve->add_option("--out", solve_out, "write solved Q as a weights file");

  // collect
  auto* collect = app.add_subcommand("collect", "record random-play corpora");
  EnvArgs collect_env;
  int collect_games = 500, collect_max_steps = 1000;
  long long collect_cap = 0;
  std::string collect_out;
  add_env_flags(collect, collect_env);
  collect->add_option("--games", collect_games, "episodes to record");
  collect->add_option("--max-steps", collect_max_steps, "episode step cap");
  collect->add_option("--max-samples", collect_cap,
                      "drop trailing episodes beyond this many samples");
  collect->add_option("--out", collect_out, "corpus output file")->required();

  // train
  auto* train = app.add_subcommand("train", "LSPI on a sample corpus");
  std::string train_corpus, train_features = "basic", train_out;
  double train_gamma = 0.0, train_tol = 1e-4, train_ridge = -1.0;
  int train_max_iter = 25;
  train->add_option("--corpus", train_corpus, "corpus file")->required();
  train->add_option("--features", train_features, "basic, extended, or poly3");
  train->add_option("--gamma", train_gamma, "discount (0 = env default)");
  train->add_option("--max-iter", train_max_iter, "LSPI iteration cap");
  train->add_option("--tol", train_tol, "weight-delta tolerance");
  train->add_option("--ridge", train_ridge, "ridge (negative = auto)");
  train->add_option("--out", train_out, "weights output file");

  // eval
  auto* eval = app.add_subcommand("eval", "tournament between two players");
  EnvArgs eval_env;
  std::string player_a = "random", player_b = "random",
              eval_features = "basic", eval_out, experiment = "eval";
  int eval_games = 1000, eval_max_steps = 100, eval_reps = 1;
  add_env_flags(eval, eval_env);
  eval->add_option("--player-a", player_a,
                   "random | exact | benchmark | weights:FILE");
  eval->add_option("--player-b", player_b, "same forms as --player-a");
  eval->add_option("--features", eval_features,
                   "feature set for benchmark players");
  eval->add_option("--games", eval_games, "games per repetition");
  eval->add_option("--max-steps", eval_max_steps, "draw cutoff");
  eval->add_option("--repetitions", eval_reps, "tournament repetitions");
  eval->add_option("--out", eval_out, "append a results CSV row");
  eval->add_option("--experiment", experiment, "results row label");

  // reproduce
  auto* reproduce =
      app.add_subcommand("reproduce", "run a full experiment preset");
  std::string preset, out_dir = ".";
  reproduce
      ->add_option("--preset", preset,
                   "soccer4 | soccer8 | soccer40-transfer | flow")
      ->required();
  reproduce->add_option("--out-dir", out_dir, "output directory");

  try {
    app.parse(argc, argv);
    const json cfg = load_config(config_file);
    override_from(cfg, "seed", seed);
    override_from(cfg, "threads", threads);
    if (solve->parsed())
      return cmd_solve(game_file, solve_env, method, solve_tol, solve_max_iter,
                       solve_out, cfg);
    if (collect->parsed())
      return cmd_collect(collect_env, collect_games, collect_max_steps, seed,
                         collect_cap, collect_out, cfg);
    if (train->parsed())
      return cmd_train(train_corpus, train_features, train_gamma,
                       train_max_iter, train_tol, train_ridge, train_out, cfg);
    if (eval->parsed())
      return cmd_eval(eval_env, player_a, player_b, eval_features, eval_games,
                      eval_max_steps, eval_reps, seed, threads, eval_out,
                      experiment, cfg);
    if (reproduce->parsed())
      return cmd_reproduce(preset, out_dir, seed, threads, cfg);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "error: %s (residual %.3e)\n", e.what(), e.residual);
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
