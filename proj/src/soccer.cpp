#include "zsmg/soccer.hpp"

#include <cmath>
#include <cstdlib>
#include <map>

namespace zsmg {

void SoccerConfig::validate() const {
  if (rows < 2 || cols < 2)
    throw GameError("SoccerConfig: board must be at least 2x2");
  if (!(discount > 0.0 && discount < 1.0))
    throw GameError("SoccerConfig: discount must lie in (0, 1)");
}

long long encode_soccer(const SoccerConfig& cfg, const SoccerState& s) {
  const int n = cfg.n_cells();
  const int pa = s.ar * cfg.cols + s.ac;
  const int pb = s.br * cfg.cols + s.bc;
  if (pa == pb) throw GameError("encode_soccer: players share a cell");
  const int pb_packed = pb < pa ? pb : pb - 1;
  return (static_cast<long long>(pa) * (n - 1) + pb_packed) * 2 + s.ball;
}

SoccerState decode_soccer(const SoccerConfig& cfg, long long code) {
  const int n = cfg.n_cells();
  if (code < 0 || code >= cfg.n_board_states())
    throw GameError("decode_soccer: code out of range");
  const int ball = static_cast<int>(code % 2);
  const long long rest = code / 2;
  const int pa = static_cast<int>(rest / (n - 1));
  int pb = static_cast<int>(rest % (n - 1));
  if (pb >= pa) ++pb;
  return {pa / cfg.cols, pa % cfg.cols, pb / cfg.cols, pb % cfg.cols, ball};
}

SoccerState soccer_reset(const SoccerConfig& cfg, Rng& rng) {
  std::uniform_int_distribution<int> row(0, cfg.rows - 1);
  std::uniform_int_distribution<int> coin(0, 1);
  return {row(rng), 0, row(rng), cfg.cols - 1, coin(rng)};
}

namespace {

struct Mover {
  int* r;
  int* c;
  int other_r, other_c;
  bool has_ball;
  bool is_a;
};

// Applies one player's move in place. Returns +1/-1 if the mover scored,
// 0 otherwise. Sets *steal when the carrier ran into the other player.
int apply_move(const SoccerConfig& cfg, Mover m, int action, bool* steal) {
  *steal = false;
  if (action == kStand) return 0;
  static constexpr int dr[] = {-1, 1, 0, 0};
  static constexpr int dc[] = {0, 0, -1, 1};
  const int nr = *m.r + dr[action];
  const int nc = *m.c + dc[action];

  // Carrier crossing the opponent's goal line within the goal zone scores.
  if (m.has_ball && *m.r >= cfg.zone_top() && *m.r <= cfg.zone_bottom()) {
    if (m.is_a && *m.c == cfg.cols - 1 && action == kRight) return 1;
    if (!m.is_a && *m.c == 0 && action == kLeft) return -1;
  }
  if (nr < 0 || nr >= cfg.rows || nc < 0 || nc >= cfg.cols) return 0;  // border
  if (nr == m.other_r && nc == m.other_c) {
    if (m.has_ball) *steal = true;  // ball passes to the opponent
    return 0;
  }
  *m.r = nr;
  *m.c = nc;
  return 0;
}

}  // namespace

SoccerStep soccer_step_ordered(const SoccerConfig& cfg, const SoccerState& s,
                               int a, int o, bool a_moves_first) {
  if (a < 0 || a >= kSoccerActions || o < 0 || o >= kSoccerActions)
    throw GameError("soccer_step: invalid action index");
  SoccerState cur = s;
  for (int turn = 0; turn < 2; ++turn) {
    const bool a_moves = (turn == 0) == a_moves_first;
    bool steal = false;
    int score;
    if (a_moves) {
      score = apply_move(cfg,
                         {&cur.ar, &cur.ac, cur.br, cur.bc, cur.ball == 0, true},
                         a, &steal);
    } else {
      score = apply_move(
          cfg, {&cur.br, &cur.bc, cur.ar, cur.ac, cur.ball == 1, false}, o,
          &steal);
    }
    if (steal) cur.ball = 1 - cur.ball;
    if (score != 0) return {cur, static_cast<double>(score), true};
  }
  return {cur, 0.0, false};
}

SoccerStep soccer_step(const SoccerConfig& cfg, const SoccerState& s, int a,
                       int o, Rng& rng) {
  std::uniform_int_distribution<int> coin(0, 1);
  return soccer_step_ordered(cfg, s, a, o, coin(rng) == 0);
}

std::vector<long long> enumerate_soccer_states(const SoccerConfig& cfg) {
  std::vector<long long> states;
  states.reserve(cfg.n_board_states());
  for (long long code = 0; code < cfg.n_board_states(); ++code)
    states.push_back(code);
  return states;
}

TabularGame soccer_exact_model(const SoccerConfig& cfg, long long state_cap) {
  cfg.validate();
  const long long n_board = cfg.n_board_states();
  if (n_board + 1 > state_cap)
    throw GameError("soccer_exact_model: " + std::to_string(n_board) +
                    " states exceed the cap of " + std::to_string(state_cap));

  TabularGame game;
  game.n_states = static_cast<int>(n_board) + 1;
  game.n_agent_actions = kSoccerActions;
  game.n_opp_actions = kSoccerActions;
  game.discount = cfg.discount;
  game.transitions.resize(game.table_size());
  game.rewards.assign(game.table_size(), 0.0);
  game.terminal.assign(game.n_states, 0);
  game.terminal[game.n_states - 1] = 1;
  const int sink = game.n_states - 1;

  for (long long code = 0; code < n_board; ++code) {
    const SoccerState s = decode_soccer(cfg, code);
    for (int a = 0; a < kSoccerActions; ++a) {
      for (int o = 0; o < kSoccerActions; ++o) {
        const int i = game.idx(static_cast<int>(code), a, o);
        std::map<int, double> row;
        double reward = 0.0;
        for (const bool a_first : {true, false}) {
          const SoccerStep step = soccer_step_ordered(cfg, s, a, o, a_first);
          reward += 0.5 * step.reward;
          const int next =
              step.terminal
                  ? sink
                  : static_cast<int>(encode_soccer(cfg, step.state));
          row[next] += 0.5;
        }
        game.rewards[i] = reward;
        for (const auto& [next, prob] : row)
          game.transitions[i].push_back({next, prob});
      }
    }
  }
  return game;
}

// ---------------------------------------------------------------------------
// Features

namespace {

// All quantities are expressed relative to the attacker (ball carrier) and
// its direction of attack; the horizontal sign flips with the direction so
// that mirrored roles produce identical vectors.
struct RoleView {
  double dh;    // horizontal distance of attacker from the defender's goal
  double sv;    // signed vertical distance of attacker from the goal zone
  double sdh;   // signed horizontal distance attacker -> defender
  double sdv;   // signed vertical distance attacker -> defender
  bool paug, palg, pawg;  // attacker at upper/lower end of, or within, zone
  bool pdgdl, pdwg;       // defender on own goal line / within zone
  bool p1, p2;
  int rel_dx, rel_dc;  // defender offset in the attack-oriented frame
  int att_action, def_action;
  double sign;  // +1 when A attacks, -1 when B attacks
};

RoleView make_view(const SoccerConfig& cfg, const SoccerState& s, int a,
                   int o) {
  RoleView v{};
  const bool a_attacks = s.ball == 0;
  const int att_r = a_attacks ? s.ar : s.br;
  const int att_c = a_attacks ? s.ac : s.bc;
  const int def_r = a_attacks ? s.br : s.ar;
  const int def_c = a_attacks ? s.bc : s.ac;
  const int dir = a_attacks ? 1 : -1;
  const int goal_col = a_attacks ? cfg.cols - 1 : 0;

  const double hscale = cfg.cols - 1;
  const double vscale = cfg.rows - 1;
  v.dh = std::abs(goal_col - att_c) / hscale;
  if (att_r < cfg.zone_top())
    v.sv = (cfg.zone_top() - att_r) / vscale;
  else if (att_r > cfg.zone_bottom())
    v.sv = -(att_r - cfg.zone_bottom()) / vscale;
  v.sdh = dir * (def_c - att_c) / hscale;
  v.sdv = (def_r - att_r) / vscale;
  v.paug = att_r == cfg.zone_top();
  v.palg = att_r == cfg.zone_bottom();
  v.pawg = att_r >= cfg.zone_top() && att_r <= cfg.zone_bottom();
  v.pdgdl = def_c == goal_col;
  v.pdwg = def_r >= cfg.zone_top() && def_r <= cfg.zone_bottom();
  v.p1 = std::abs(goal_col - att_c) < std::abs(goal_col - def_c);
  v.p2 = std::abs(att_r - def_r) + std::abs(att_c - def_c) <= 2;
  v.rel_dx = dir * (def_c - att_c);
  v.rel_dc = def_r - att_r;
  v.att_action = a_attacks ? a : o;
  v.def_action = a_attacks ? o : a;
  v.sign = a_attacks ? 1.0 : -1.0;
  return v;
}

// The 10 defender offsets within Manhattan distance 2 of the attacker, in
// the attack-oriented frame, minus the two purely-backward ones.
constexpr std::array<std::pair<int, int>, 10> kDefenderOffsets = {{
    {0, -2}, {-1, -1}, {0, -1}, {1, -1}, {-2, 0}, {-1, 0},
    {1, 0},  {2, 0},   {1, 1},  {0, 2},
}};  // (forward dx, dy) pairs; excludes (-1, 0) and (-2, 0) backward offsets

}  // namespace

SoccerFeatures::SoccerFeatures(const SoccerConfig& cfg, bool extended)
    : cfg_(cfg), extended_(extended) {
  cfg.validate();
  const auto sizes = case_sizes(extended);
  int total = 0;
  for (int s : sizes) total += s;
  if (total != (extended ? kExtendedBlock : kBasicBlock))
    throw GameError("SoccerFeatures: case sizes do not sum to the block width");
}

std::array<int, 4> SoccerFeatures::case_sizes(bool extended) {
  return extended ? std::array<int, 4>{9, 12, 15, 20}
                  : std::array<int, 4>{4, 8, 7, 17};
}

int SoccerFeatures::dimension() const {
  return (extended_ ? kExtendedBlock : kBasicBlock) * kSoccerActions *
         kSoccerActions;
}

std::string SoccerFeatures::id() const {
  return std::string("soccer-") + (extended_ ? "extended" : "basic");
}

void SoccerFeatures::evaluate(long long state, int a, int o,
                              SparseVec& out) const {
  out.clear();
  if (a < 0 || a >= kSoccerActions || o < 0 || o >= kSoccerActions)
    throw GameError("SoccerFeatures: invalid action index");
  const RoleView v = make_view(cfg_, decode_soccer(cfg_, state), a, o);
  const int block_width = extended_ ? kExtendedBlock : kBasicBlock;
  const int base = (v.att_action * kSoccerActions + v.def_action) * block_width;

  auto put = [&](int local, double value) {
    if (value != 0.0) out.push_back({base + local, v.sign * value});
  };

  // Basic block, local slots 0..35. Case offsets: 0, 4, 12, 19.
  if (v.p1 && !v.p2) {
    put(0, 1.0);
    put(1, v.dh);
    put(2, v.sv);
    put(3, v.dh * v.sv);
  } else if (v.p1 && v.p2) {
    put(4, 1.0);
    put(5, v.dh);
    put(6, v.sv);
    put(7, v.dh * v.sv);
    put(8, v.paug ? 1.0 : 0.0);
    put(9, v.palg ? 1.0 : 0.0);
    put(10, v.sdh);
    put(11, v.sdv);
  } else if (!v.p1 && !v.p2) {
    put(12, 1.0);
    put(13, v.dh);
    put(14, v.sv);
    put(15, v.dh * v.sv);
    put(16, v.paug ? 1.0 : 0.0);
    put(17, v.palg ? 1.0 : 0.0);
    put(18, v.sdv);
  } else {
    put(19, v.dh);
    put(20, v.sv);
    put(21, v.dh * v.sv);
    put(22, v.paug ? 1.0 : 0.0);
    put(23, v.palg ? 1.0 : 0.0);
    put(24, v.pdgdl ? 1.0 : 0.0);
    put(25, v.pdwg ? 1.0 : 0.0);
    for (int i = 0; i < 10; ++i) {
      const auto [dx, dy] = kDefenderOffsets[i];
      put(26 + i, (v.rel_dx == dx && v.rel_dc == dy) ? 1.0 : 0.0);
    }
  }

  if (!extended_) return;

  // Extended crossterms, local slots 36..55. Case offsets: 36, 41, 45, 53.
  if (v.p1 && !v.p2) {
    put(36, v.dh * v.dh);
    put(37, v.sv * v.sv);
    put(38, v.paug ? 1.0 : 0.0);
    put(39, v.palg ? 1.0 : 0.0);
    put(40, v.pawg ? 1.0 : 0.0);
  } else if (v.p1 && v.p2) {
    put(41, v.dh * v.dh);
    put(42, v.sv * v.sv);
    put(43, v.pawg ? 1.0 : 0.0);
    put(44, v.sdh * v.sdv);
  } else if (!v.p1 && !v.p2) {
    put(45, v.dh * v.dh);
    put(46, v.sv * v.sv);
    put(47, v.pawg ? 1.0 : 0.0);
    put(48, v.sdh);
    put(49, v.sdv * v.sdv);
    put(50, v.sdh * v.sdh);
    put(51, v.sdh * v.sdv);
    put(52, v.pdwg ? 1.0 : 0.0);
  } else {
    put(53, v.dh * v.dh);
    put(54, v.sv * v.sv);
    put(55, v.pawg ? 1.0 : 0.0);
  }
}

std::string SoccerEnv::id() const {
  return "soccer-" + std::to_string(cfg_.rows) + "x" +
         std::to_string(cfg_.cols);
}

long long SoccerEnv::reset(Rng& rng) const {
  return encode_soccer(cfg_, soccer_reset(cfg_, rng));
}

StepOutcome SoccerEnv::step(long long state, int a, int o, Rng& rng) const {
  const SoccerStep step =
      soccer_step(cfg_, decode_soccer(cfg_, state), a, o, rng);
  return {step.terminal ? -1 : encode_soccer(cfg_, step.state), step.reward,
          step.terminal};
}

}  // namespace zsmg
