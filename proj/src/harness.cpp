#include "zsmg/harness.hpp"

#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <thread>

#include "zsmg/dp.hpp"

namespace zsmg {

namespace {

Vector cached_strategy(std::unordered_map<long long, Vector>& cache,
                       std::mutex& mutex, long long state,
                       const std::function<Vector()>& compute) {
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(state);
  if (it != cache.end()) return it->second;
  return cache.emplace(state, compute()).first->second;
}

int sample_action(const Vector& strategy, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng);
  for (int a = 0; a < strategy.size(); ++a) {
    u -= strategy[a];
    if (u <= 0.0) return a;
  }
  return static_cast<int>(strategy.size()) - 1;
}

double t_halfwidth(const std::vector<double>& xs) {
  const int n = static_cast<int>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= (n - 1);
  const boost::math::students_t dist(n - 1);
  return boost::math::quantile(dist, 0.975) * std::sqrt(var / n);
}

// Runs jobs [0, count) across a small worker pool; job order is fixed and
// each job derives its own seed, so results are thread-count independent.
void parallel_for(int count, int threads, const std::function<void(int)>& job) {
  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

ExactPlayer::ExactPlayer(QTable q, std::string name)
    : q_(std::move(q)), name_(std::move(name)) {}

Vector ExactPlayer::agent_strategy(long long state) const {
  return cached_strategy(a_cache_, mutex_, state, [&] {
    Matrix m(q_.n_agent_actions, q_.n_opp_actions);
    for (int a = 0; a < q_.n_agent_actions; ++a)
      for (int o = 0; o < q_.n_opp_actions; ++o)
        m(a, o) = q_.at(static_cast<int>(state), a, o);
    return solve_maximin(m).strategy;
  });
}

Vector ExactPlayer::opponent_strategy(long long state) const {
  return cached_strategy(b_cache_, mutex_, state, [&] {
    Matrix m(q_.n_opp_actions, q_.n_agent_actions);
    for (int o = 0; o < q_.n_opp_actions; ++o)
      for (int a = 0; a < q_.n_agent_actions; ++a)
        m(o, a) = -q_.at(static_cast<int>(state), a, o);
    return solve_maximin(m).strategy;
  });
}

WeightsPlayer::WeightsPlayer(WeightVector weights,
                             std::shared_ptr<const FeatureMap> features,
                             int n_agent_actions, int n_opp_actions,
                             std::string name)
    : weights_(std::move(weights)),
      features_(std::move(features)),
      na_(n_agent_actions),
      no_(n_opp_actions),
      name_(std::move(name)) {
  if (weights_.w.size() != features_->dimension())
    throw NumericError("WeightsPlayer: weight/feature dimension mismatch");
}

Matrix WeightsPlayer::value_matrix(long long state) const {
  Matrix m(na_, no_);
  SparseVec sv;
  for (int a = 0; a < na_; ++a) {
    for (int o = 0; o < no_; ++o) {
      features_->evaluate(state, a, o, sv);
      double q = 0.0;
      for (const auto& e : sv) q += e.value * weights_.w[e.index];
      m(a, o) = q;
    }
  }
  return m;
}

Vector WeightsPlayer::agent_strategy(long long state) const {
  return cached_strategy(a_cache_, mutex_, state, [&] {
    return solve_maximin(value_matrix(state)).strategy;
  });
}

Vector WeightsPlayer::opponent_strategy(long long state) const {
  return cached_strategy(b_cache_, mutex_, state, [&] {
    return solve_maximin(Matrix(-value_matrix(state).transpose())).strategy;
  });
}

FixedPlayer::FixedPlayer(PolicyTable agent_side, PolicyTable opponent_side,
                         std::string name)
    : agent_side_(std::move(agent_side)),
      opponent_side_(std::move(opponent_side)),
      name_(std::move(name)) {}

Vector FixedPlayer::agent_strategy(long long state) const {
  Vector v(agent_side_.n_actions);
  for (int a = 0; a < agent_side_.n_actions; ++a)
    v[a] = agent_side_.at(static_cast<int>(state), a);
  return v;
}

Vector FixedPlayer::opponent_strategy(long long state) const {
  Vector v(opponent_side_.n_actions);
  for (int o = 0; o < opponent_side_.n_actions; ++o)
    v[o] = opponent_side_.at(static_cast<int>(state), o);
  return v;
}

SampleCorpus collect_random_games(const GameEnv& env, int n_games,
                                  int max_steps, std::uint64_t seed,
                                  long long max_samples) {
  SampleCorpus corpus;
  corpus.env_id = env.id();
  corpus.n_agent_actions = env.n_agent_actions();
  corpus.n_opp_actions = env.n_opp_actions();
  corpus.seed = seed;
  corpus.episodes = n_games;
  corpus.sample_cap = max_samples;

  std::vector<std::size_t> episode_starts;
  for (int g = 0; g < n_games; ++g) {
    Rng rng(derive_seed(seed, g));
    episode_starts.push_back(corpus.samples.size());
    std::uniform_int_distribution<int> agent(0, env.n_agent_actions() - 1);
    std::uniform_int_distribution<int> opp(0, env.n_opp_actions() - 1);
    long long state = env.reset(rng);
    for (int t = 0; t < max_steps; ++t) {
      const int a = agent(rng);
      const int o = opp(rng);
      const StepOutcome out = env.step(state, a, o, rng);
      corpus.samples.push_back(
          {state, a, o, out.reward, out.next_state, out.terminal});
      if (out.terminal) break;
      state = out.next_state;
    }
  }

  // Cap by dropping whole episodes from the end.
  if (max_samples > 0 &&
      static_cast<long long>(corpus.samples.size()) > max_samples) {
    int kept = n_games;
    while (kept > 0 &&
           static_cast<long long>(corpus.samples.size()) > max_samples) {
      corpus.samples.resize(episode_starts[--kept]);
    }
    corpus.episodes = kept;
  }
  return corpus;
}

PlayResult play_game(const GameEnv& env, const Player& player_a,
                     const Player& player_b, int max_steps,
                     std::uint64_t seed) {
  Rng rng(seed);
  long long state = env.reset(rng);
  const double gamma = env.discount();
  double score = 0.0;
  double df = 1.0;
  for (int t = 0; t < max_steps; ++t) {
    const int a = sample_action(player_a.agent_strategy(state), rng);
    const int o = sample_action(player_b.opponent_strategy(state), rng);
    const StepOutcome out = env.step(state, a, o, rng);
    score += df * out.reward;
    df *= gamma;
    if (out.terminal) {
      const GameOutcome outcome = out.reward > 0   ? GameOutcome::kAgentWin
                                  : out.reward < 0 ? GameOutcome::kOpponentWin
                                                   : GameOutcome::kDraw;
      return {outcome, t + 1, score};
    }
    state = out.next_state;
  }
  return {GameOutcome::kDraw, max_steps, score};
}

TournamentResult tournament(const GameEnv& env, const Player& player_a,
                            const Player& player_b, int games, int max_steps,
                            int repetitions, std::uint64_t seed, int threads) {
  TournamentResult result;
  result.games = games;
  result.repetitions = repetitions;
  result.per_rep_wins.resize(repetitions);
  result.per_rep_draws.resize(repetitions);
  result.per_rep_losses.resize(repetitions);
  result.per_rep_scores.resize(repetitions);

  parallel_for(repetitions, threads, [&](int rep) {
    int wins = 0, draws = 0, losses = 0;
    double score = 0.0;
    for (int g = 0; g < games; ++g) {
      const std::uint64_t game_seed =
          derive_seed(seed, static_cast<std::uint64_t>(rep) * games + g);
      // Alternate which player sits in the maximizing seat so both
      // orientations are represented.
      const bool swapped = (g % 2) == 1;
      const PlayResult r = swapped
                               ? play_game(env, player_b, player_a, max_steps,
                                           game_seed)
                               : play_game(env, player_a, player_b, max_steps,
                                           game_seed);
      const double a_score = swapped ? -r.discounted_score : r.discounted_score;
      score += a_score;
      GameOutcome outcome = r.outcome;
      if (swapped && outcome == GameOutcome::kAgentWin)
        outcome = GameOutcome::kOpponentWin;
      else if (swapped && outcome == GameOutcome::kOpponentWin)
        outcome = GameOutcome::kAgentWin;
      if (outcome == GameOutcome::kAgentWin)
        ++wins;
      else if (outcome == GameOutcome::kOpponentWin)
        ++losses;
      else
        ++draws;
    }
    result.per_rep_wins[rep] = wins;
    result.per_rep_draws[rep] = draws;
    result.per_rep_losses[rep] = losses;
    result.per_rep_scores[rep] = score;
  });

  for (int rep = 0; rep < repetitions; ++rep) {
    result.wins += result.per_rep_wins[rep] / repetitions;
    result.draws += result.per_rep_draws[rep] / repetitions;
    result.losses += result.per_rep_losses[rep] / repetitions;
    result.total_discounted_score += result.per_rep_scores[rep] / repetitions;
  }
  if (repetitions >= 2) {
    result.score_ci_halfwidth = t_halfwidth(result.per_rep_scores);
    std::vector<double> win_rates(repetitions), loss_rates(repetitions);
    for (int rep = 0; rep < repetitions; ++rep) {
      win_rates[rep] = result.per_rep_wins[rep] / games;
      loss_rates[rep] = result.per_rep_losses[rep] / games;
    }
    result.win_rate_ci_halfwidth = t_halfwidth(win_rates);
    result.loss_rate_ci_halfwidth = t_halfwidth(loss_rates);
  }
  return result;
}

WeightVector build_benchmark_player(const SoccerConfig& cfg,
                                    const FeatureMap& features,
                                    double discount, long long state_cap) {
  if (cfg.n_board_states() > state_cap)
    throw GameError("build_benchmark_player: state count exceeds cap");
  SampleCorpus corpus;
  corpus.env_id = SoccerEnv(cfg).id();
  corpus.n_agent_actions = kSoccerActions;
  corpus.n_opp_actions = kSoccerActions;
  for (long long code = 0; code < cfg.n_board_states(); ++code) {
    const SoccerState s = decode_soccer(cfg, code);
    for (int a = 0; a < kSoccerActions; ++a) {
      for (int o = 0; o < kSoccerActions; ++o) {
        for (const bool a_first : {true, false}) {
          const SoccerStep step = soccer_step_ordered(cfg, s, a, o, a_first);
          corpus.samples.push_back(
              {code, a, o, step.reward,
               step.terminal ? -1 : encode_soccer(cfg, step.state),
               step.terminal});
        }
      }
    }
  }
  LspiResult trained = lspi(corpus, features, discount);
  trained.weights.env = corpus.env_id;
  return trained.weights;
}

std::vector<LearningCurveRow> learning_curve(
    const GameEnv& env, const std::vector<int>& corpus_sizes,
    std::shared_ptr<const FeatureMap> features, const Player& opponent,
    const LearningCurveProtocol& protocol) {
  struct Job {
    int size_index;
    int repetition;
  };
  std::vector<Job> jobs;
  for (int i = 0; i < static_cast<int>(corpus_sizes.size()); ++i)
    for (int rep = 0; rep < protocol.repetitions; ++rep) jobs.push_back({i, rep});

  std::vector<LearningCurveRow> rows(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), protocol.threads, [&](int j) {
    const auto [size_index, rep] = jobs[j];
    const int n_games = corpus_sizes[size_index];
    const std::uint64_t job_seed = derive_seed(
        protocol.seed, static_cast<std::uint64_t>(size_index) * 10000 + rep);

    std::unique_ptr<Player> contender;
    if (n_games == 0) {
      contender = std::make_unique<RandomPlayer>(env.n_agent_actions(),
                                                 env.n_opp_actions());
    } else {
      const SampleCorpus corpus =
          collect_random_games(env, n_games, protocol.max_episode_steps,
                               derive_seed(job_seed, 1), protocol.max_samples);
      const LspiResult trained =
          lspi(corpus, *features, env.discount(), protocol.lspi_max_iter,
               protocol.lspi_tol);
      contender = std::make_unique<WeightsPlayer>(
          trained.weights, features, env.n_agent_actions(),
          env.n_opp_actions(), "lspi-" + std::to_string(n_games));
    }
    rows[j].corpus_games = n_games;
    rows[j].repetition = rep;
    rows[j].result =
        tournament(env, *contender, opponent, protocol.tournament_games,
                   protocol.tournament_max_steps, 1, derive_seed(job_seed, 2),
                   1);
  });
  return rows;
}

TournamentResult cross_grid_transfer(const WeightVector& weights,
                                     const SoccerConfig& target,
                                     const Player& opponent, int games,
                                     int max_steps, int repetitions,
                                     std::uint64_t seed, bool extended,
                                     int threads) {
  const SoccerEnv env(target);
  auto features = std::make_shared<SoccerFeatures>(target, extended);
  const WeightsPlayer transferred(weights, features, kSoccerActions,
                                  kSoccerActions, "transferred");
  return tournament(env, transferred, opponent, games, max_steps, repetitions,
                    seed, threads);
}

}  // namespace zsmg
