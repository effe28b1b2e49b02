#include "mu2/semantics.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <functional>
#include <numeric>
#include <sstream>

namespace mu2 {

// ---------------------------------------------------------------------------
// Kripke models

int KripkeModel::state_index(const std::string& name) const {
  for (int i = 0; i < n_states(); ++i)
    if (states[i] == name) return i;
  return -1;
}

void KripkeModel::add_state(const std::string& name) {
  states.push_back(name);
  for (auto& [a, v] : succ) v.emplace_back();
  for (auto& [a, v] : pred) v.emplace_back();
}

void KripkeModel::add_edge(int s, const std::string& base, int t) {
  auto& fw = succ[base];
  auto& bw = pred[base];
  fw.resize(states.size());
  bw.resize(states.size());
  fw[s].push_back(t);
  bw[t].push_back(s);
}

void KripkeModel::set_prop(const std::string& p, int s, bool on) {
  if (on) val[p].insert(s);
  else val[p].erase(s);
}

bool KripkeModel::has_prop(const std::string& p, int s) const {
  auto it = val.find(p);
  return it != val.end() && it->second.count(s) > 0;
}

const std::vector<int>& KripkeModel::moves(const Action& a, int s) const {
  static const std::vector<int> none;
  const auto& table = a.conv ? pred : succ;
  auto it = table.find(a.base);
  if (it == table.end() || s >= (int)it->second.size()) return none;
  return it->second[s];
}

std::string KripkeModel::str() const {
  std::ostringstream os;
  os << "states:";
  for (const auto& s : states) os << " " << s;
  for (const auto& [a, v] : succ)
    for (int s = 0; s < (int)v.size(); ++s)
      for (int t : v[s]) os << "\n  " << states[s] << " -" << a << "-> " << states[t];
  for (const auto& [p, ss] : val) {
    os << "\n  " << p << ":";
    for (int s : ss) os << " " << states[s];
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Zielonka

namespace {

// attractor of `target` for player p within `alive`; fills strategy choices
// for p-positions pulled in via an edge.
std::vector<char> attractor(const ParityGame& g, const std::vector<char>& alive, Player p,
                            const std::vector<char>& target, PositionalStrategy& strat) {
  int n = g.size();
  std::vector<char> in(n, 0);
  std::vector<int> cnt(n, 0);  // outstanding moves for opponent positions
  std::deque<int> queue;
  for (int v = 0; v < n; ++v) {
    if (!alive[v]) continue;
    if (target[v]) {
      in[v] = 1;
      queue.push_back(v);
    }
    if (g.owner[v] != p) {
      for (int w : g.moves[v])
        if (alive[w]) ++cnt[v];
    }
  }
  // reverse edges on demand
  std::vector<std::vector<int>> rev(n);
  for (int v = 0; v < n; ++v) {
    if (!alive[v]) continue;
    for (int w : g.moves[v])
      if (alive[w]) rev[w].push_back(v);
  }
  while (!queue.empty()) {
    int w = queue.front();
    queue.pop_front();
    for (int v : rev[w]) {
      if (in[v]) continue;
      if (g.owner[v] == p) {
        in[v] = 1;
        if (!strat.count(v)) strat[v] = w;
        queue.push_back(v);
      } else {
        if (--cnt[v] == 0) {
          in[v] = 1;
          queue.push_back(v);
        }
      }
    }
  }
  return in;
}

void zielonka(const ParityGame& g, std::vector<char> alive, std::vector<Player>& winner,
              PositionalStrategy& se, PositionalStrategy& sf) {
  int n = g.size();
  int top = -1;
  for (int v = 0; v < n; ++v)
    if (alive[v]) top = std::max(top, g.priority[v]);
  if (top < 0) return;
  Player sigma = (top % 2 == 0) ? Player::Exists : Player::Forall;
  PositionalStrategy& ssig = sigma == Player::Exists ? se : sf;
  PositionalStrategy& sopp = sigma == Player::Exists ? sf : se;

  std::vector<char> target(n, 0);
  for (int v = 0; v < n; ++v)
    if (alive[v] && g.priority[v] == top) target[v] = 1;

  PositionalStrategy pull;
  auto a = attractor(g, alive, sigma, target, pull);

  std::vector<char> rest = alive;
  for (int v = 0; v < n; ++v)
    if (a[v]) rest[v] = 0;

  std::vector<Player> w2(n, sigma);
  PositionalStrategy se2, sf2;
  zielonka(g, rest, w2, se2, sf2);
  bool opp_empty = true;
  for (int v = 0; v < n; ++v)
    if (rest[v] && w2[v] == opponent(sigma)) opp_empty = false;

  if (opp_empty) {
    for (int v = 0; v < n; ++v)
      if (alive[v]) winner[v] = sigma;
    // subgame strategy on rest, pull on the attractor, any alive move at the
    // top-priority positions
    for (auto& [k, v] : (sigma == Player::Exists ? se2 : sf2)) ssig[k] = v;
    for (auto& [k, v] : pull)
      if (!ssig.count(k)) ssig[k] = v;
    for (int v = 0; v < n; ++v) {
      if (!alive[v] || !target[v] || g.owner[v] != sigma || ssig.count(v)) continue;
      for (int w : g.moves[v])
        if (alive[w]) { ssig[v] = w; break; }
    }
    return;
  }

  // opponent wins part of the subgame: attract to it and re-solve the rest
  std::vector<char> oppwin(n, 0);
  for (int v = 0; v < n; ++v)
    if (rest[v] && w2[v] == opponent(sigma)) oppwin[v] = 1;
  PositionalStrategy pull2;
  auto b = attractor(g, alive, opponent(sigma), oppwin, pull2);
  std::vector<char> alive2 = alive;
  for (int v = 0; v < n; ++v)
    if (b[v]) alive2[v] = 0;
  zielonka(g, alive2, winner, se, sf);
  for (int v = 0; v < n; ++v)
    if (b[v]) winner[v] = opponent(sigma);
  for (auto& [k, v] : (sigma == Player::Exists ? sf2 : se2))
    if (oppwin[k] && !sopp.count(k)) sopp[k] = v;
  for (auto& [k, v] : pull2)
    if (!sopp.count(k)) sopp[k] = v;
}

}  // namespace

GameSolution solve_parity_game(const ParityGame& g) {
  int n = g.size();
  GameSolution sol;
  sol.winner.assign(n, Player::Forall);
  // dead ends: owner loses immediately; rewire through a sink transformation
  ParityGame h = g;
  int sink_e = -1, sink_f = -1;  // positions where Exists resp. Forall wins
  for (int v = 0; v < n; ++v) {
    if (!g.moves[v].empty()) continue;
    if (g.owner[v] == Player::Exists) {
      if (sink_f < 0) {
        sink_f = h.add_position(Player::Exists, 1);
        h.moves[sink_f].push_back(sink_f);
      }
      h.moves[v].push_back(sink_f);
    } else {
      if (sink_e < 0) {
        sink_e = h.add_position(Player::Forall, 2);
        h.moves[sink_e].push_back(sink_e);
      }
      h.moves[v].push_back(sink_e);
    }
  }
  std::vector<char> alive(h.size(), 1);
  std::vector<Player> win(h.size(), Player::Forall);
  PositionalStrategy se, sf;
  zielonka(h, alive, win, se, sf);
  for (int v = 0; v < n; ++v) sol.winner[v] = win[v];
  // drop strategy entries at dead ends and sinks
  for (auto& [k, v] : se)
    if (k < n && !g.moves[k].empty() && sol.winner[k] == Player::Exists)
      sol.strategy_exists[k] = v;
  for (auto& [k, v] : sf)
    if (k < n && !g.moves[k].empty() && sol.winner[k] == Player::Forall)
      sol.strategy_forall[k] = v;
  return sol;
}

bool audit_strategy(const ParityGame& g, Player p, const std::vector<int>& region,
                    const PositionalStrategy& strat) {
  int n = g.size();
  std::vector<char> in_region(n, 0);
  for (int v : region) in_region[v] = 1;
  // restricted graph: p follows strat, opponent moves freely
  auto edges = [&](int v) {
    std::vector<int> out;
    if (g.owner[v] == p) {
      auto it = strat.find(v);
      if (it != strat.end()) out.push_back(it->second);
    } else {
      out = g.moves[v];
    }
    return out;
  };
  for (int start : region) {
    // reachable set
    std::vector<char> seen(n, 0);
    std::deque<int> q{start};
    seen[start] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int w : edges(v))
        if (!seen[w]) { seen[w] = 1; q.push_back(w); }
    }
    for (int v = 0; v < n; ++v) {
      if (!seen[v]) continue;
      if (!in_region[v]) return false;          // play escapes the region
      if (g.owner[v] == p && g.moves[v].empty()) return false;  // p stuck
      if (g.owner[v] == p && !g.moves[v].empty() && !strat.count(v)) return false;
    }
    // no reachable cycle with opponent-favourable maximum: for each such
    // priority value, an SCC containing it with an internal edge is fatal
    for (int prio = 0; prio <= *std::max_element(g.priority.begin(), g.priority.end());
         ++prio) {
      bool opp_fav = (prio % 2 == 0) != (p == Player::Exists);
      if (!opp_fav) continue;
      // subgraph of reachable nodes with priority <= prio
      std::vector<int> comp(n, -1);
      std::vector<int> order;
      std::vector<char> vis(n, 0);
      std::function<void(int)> dfs1 = [&](int v) {
        vis[v] = 1;
        for (int w : edges(v))
          if (seen[w] && g.priority[w] <= prio && !vis[w]) dfs1(w);
        order.push_back(v);
      };
      for (int v = 0; v < n; ++v)
        if (seen[v] && g.priority[v] <= prio && !vis[v]) dfs1(v);
      // transpose DFS
      std::vector<std::vector<int>> rev(n);
      for (int v = 0; v < n; ++v) {
        if (!seen[v] || g.priority[v] > prio) continue;
        for (int w : edges(v))
          if (seen[w] && g.priority[w] <= prio) rev[w].push_back(v);
      }
      int c = 0;
      std::function<void(int, int)> dfs2 = [&](int v, int cc) {
        comp[v] = cc;
        for (int w : rev[v])
          if (comp[w] < 0) dfs2(w, cc);
      };
      for (auto it = order.rbegin(); it != order.rend(); ++it)
        if (comp[*it] < 0) dfs2(*it, c++);
      // SCC with a priority-prio node and an internal edge?
      std::vector<char> has_prio(c, 0), has_edge(c, 0);
      for (int v = 0; v < n; ++v) {
        if (comp[v] < 0) continue;
        if (g.priority[v] == prio) has_prio[comp[v]] = 1;
        for (int w : edges(v))
          if (comp[w] == comp[v] && (w != v || true)) has_edge[comp[v]] = 1;
      }
      for (int i = 0; i < c; ++i)
        if (has_prio[i] && has_edge[i]) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Evaluation game

int EvalGame::pos(const Formula& f, int s) const {
  auto it = position.find({f, s});
  if (it == position.end()) throw RuleError("evaluation game: unknown position");
  return it->second;
}

int EvalGame::raw_priority(int p) const { return game.priority[p] - 1; }

EvalGame build_eval_game(const Universe& u, const KripkeModel& m) {
  EvalGame eg;
  eg.universe = &u;
  eg.model = &m;
  int ns = m.n_states();
  for (const auto& f : u.formulas())
    for (int s = 0; s < ns; ++s) {
      // priority shifted by one: a mu-trace (even Omega dominant) must lose
      // for Exists under the solver's even-wins convention.
      int p = eg.game.add_position(Player::Forall, u.omega(f) + 1);
      eg.label.push_back({f, s});
      eg.position[{f, s}] = p;
    }
  for (int p = 0; p < eg.game.size(); ++p) {
    auto [f, s] = eg.label[p];
    switch (f.kind()) {
      case FKind::Prop:
        eg.game.owner[p] = m.has_prop(f.name(), s) ? Player::Forall : Player::Exists;
        break;
      case FKind::NegProp:
        eg.game.owner[p] = m.has_prop(f.name(), s) ? Player::Exists : Player::Forall;
        break;
      case FKind::Bot:
        eg.game.owner[p] = Player::Exists;  // Exists stuck: loses
        break;
      case FKind::Top:
        eg.game.owner[p] = Player::Forall;
        break;
      case FKind::Or:
        eg.game.owner[p] = Player::Exists;
        eg.game.moves[p].push_back(eg.pos(f.left(), s));
        eg.game.moves[p].push_back(eg.pos(f.right(), s));
        break;
      case FKind::And:
        eg.game.owner[p] = Player::Forall;
        eg.game.moves[p].push_back(eg.pos(f.left(), s));
        eg.game.moves[p].push_back(eg.pos(f.right(), s));
        break;
      case FKind::Dia:
        eg.game.owner[p] = Player::Exists;
        for (int t : m.moves(f.action(), s)) eg.game.moves[p].push_back(eg.pos(f.body(), t));
        break;
      case FKind::Box:
        eg.game.owner[p] = Player::Forall;
        for (int t : m.moves(f.action(), s)) eg.game.moves[p].push_back(eg.pos(f.body(), t));
        break;
      case FKind::Mu:
      case FKind::Nu:
        eg.game.owner[p] = Player::Exists;  // no real choice: single move
        eg.game.moves[p].push_back(eg.pos(unfold(f), s));
        break;
      default:
        throw RuleError("evaluation game: open formula");
    }
  }
  return eg;
}

bool model_check(const KripkeModel& m, int s, const Formula& phi) {
  if (!phi.is_sentence()) throw RuleError("model_check requires a sentence");
  Universe u = Universe::of({phi});
  EvalGame eg = build_eval_game(u, m);
  GameSolution sol = solve_parity_game(eg.game);
  return sol.winner[eg.pos(phi, s)] == Player::Exists;
}

// ---------------------------------------------------------------------------
// Algebraic semantics: direct evaluation on the locally-nameless tree, with
// an environment indexed by binder depth.

namespace {

std::set<int> eval_alg2(const KripkeModel& m, const Formula& f,
                        std::vector<std::set<int>>& benv) {
  switch (f.kind()) {
    case FKind::Bot: return {};
    case FKind::Top: {
      std::set<int> all;
      for (int i = 0; i < m.n_states(); ++i) all.insert(i);
      return all;
    }
    case FKind::Prop: {
      auto it = m.val.find(f.name());
      return it == m.val.end() ? std::set<int>{} : it->second;
    }
    case FKind::NegProp: {
      std::set<int> out;
      for (int i = 0; i < m.n_states(); ++i)
        if (!m.has_prop(f.name(), i)) out.insert(i);
      return out;
    }
    case FKind::BVar: {
      size_t i = f.bindex();
      if (i >= benv.size()) throw RuleError("algebraic eval: dangling index");
      return benv[benv.size() - 1 - i];
    }
    case FKind::Var:
      throw RuleError("algebraic eval needs sentences");
    case FKind::Or: {
      auto a = eval_alg2(m, f.left(), benv);
      auto b = eval_alg2(m, f.right(), benv);
      a.insert(b.begin(), b.end());
      return a;
    }
    case FKind::And: {
      auto a = eval_alg2(m, f.left(), benv);
      auto b = eval_alg2(m, f.right(), benv);
      std::set<int> out;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                            std::inserter(out, out.begin()));
      return out;
    }
    case FKind::Dia: {
      auto b = eval_alg2(m, f.body(), benv);
      std::set<int> out;
      for (int s = 0; s < m.n_states(); ++s)
        for (int t : m.moves(f.action(), s))
          if (b.count(t)) { out.insert(s); break; }
      return out;
    }
    case FKind::Box: {
      auto b = eval_alg2(m, f.body(), benv);
      std::set<int> out;
      for (int s = 0; s < m.n_states(); ++s) {
        bool all = true;
        for (int t : m.moves(f.action(), s))
          if (!b.count(t)) { all = false; break; }
        if (all) out.insert(s);
      }
      return out;
    }
    case FKind::Mu: {
      std::set<int> x;
      for (;;) {
        benv.push_back(x);
        auto next = eval_alg2(m, f.body(), benv);
        benv.pop_back();
        if (next == x) return x;
        x = std::move(next);
      }
    }
    case FKind::Nu: {
      std::set<int> x;
      for (int i = 0; i < m.n_states(); ++i) x.insert(i);
      for (;;) {
        benv.push_back(x);
        auto next = eval_alg2(m, f.body(), benv);
        benv.pop_back();
        if (next == x) return x;
        x = std::move(next);
      }
    }
  }
  return {};
}

}  // namespace

std::set<int> eval_algebraic(const KripkeModel& m, const Formula& phi) {
  std::vector<std::set<int>> benv;
  return eval_alg2(m, phi, benv);
}

bool model_check_algebraic(const KripkeModel& m, int s, const Formula& phi) {
  if (!phi.is_sentence()) throw RuleError("model_check requires a sentence");
  return eval_algebraic(m, phi).count(s) > 0;
}

// ---------------------------------------------------------------------------
// Trace atoms

bool trace_atom_holds(const EvalGame& eg, int s, const PositionalStrategy& f,
                      const TraceAtom& t) {
  if (!t.positive) throw RuleError("trace_atom_holds takes positive atoms");
  const ParityGame& g = eg.game;
  int n = g.size();
  int maxo = 0;
  for (int p = 0; p < n; ++p) maxo = std::max(maxo, eg.raw_priority(p));
  // edges in the f-restricted game
  auto edges = [&](int v) -> std::vector<int> {
    if (g.owner[v] == Player::Exists) {
      auto it = f.find(v);
      if (it == f.end()) return {};
      return {it->second};
    }
    return g.moves[v];
  };
  int src = eg.pos(t.source, s);
  int tgt = eg.pos(t.target, s);
  // ach[v] = bitmask of exact maxima achievable over nonempty paths v -> tgt
  // counting priorities of every node except the final tgt.
  std::vector<uint32_t> ach(n, 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int v = 0; v < n; ++v) {
      uint32_t mask = ach[v];
      int pv = eg.raw_priority(v);
      for (int w : edges(v)) {
        if (w == tgt) mask |= (1u << pv);
        uint32_t rest = ach[w];
        for (int k = 0; k <= maxo; ++k)
          if (rest & (1u << k)) mask |= (1u << std::max(k, pv));
      }
      if (mask != ach[v]) { ach[v] = mask; changed = true; }
    }
  }
  return t.k <= maxo + 1 && (ach[src] & (1u << t.k)) != 0;
}

// ---------------------------------------------------------------------------
// Bounded satisfiability

// Positions reachable from `start` when Exists follows f and Forall is free.
static std::vector<int> needed_closure(const EvalGame& eg, const PositionalStrategy& f,
                                       const std::vector<int>& start) {
  const ParityGame& g = eg.game;
  std::vector<char> seen(g.size(), 0);
  std::deque<int> q;
  for (int v : start)
    if (!seen[v]) { seen[v] = 1; q.push_back(v); }
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    std::vector<int> next;
    if (g.owner[v] == Player::Exists) {
      auto it = f.find(v);
      if (it != f.end()) next.push_back(it->second);
    } else {
      next = g.moves[v];
    }
    for (int w : next)
      if (!seen[w]) { seen[w] = 1; q.push_back(w); }
  }
  std::vector<int> out;
  for (int v = 0; v < g.size(); ++v)
    if (seen[v]) out.push_back(v);
  return out;
}

namespace {

// Enumerate positional Exists strategies restricted to its winning region and
// test the full sequent; returns a witness strategy if some choice satisfies
// every formula and trace atom.
std::optional<PositionalStrategy> find_strategy(const EvalGame& eg, const Sequent& gamma,
                                                int s, const SatBudget& budget,
                                                bool& exhausted) {
  const ParityGame& g = eg.game;
  GameSolution sol = solve_parity_game(g);
  std::vector<int> region = sol.region(Player::Exists);
  std::vector<char> in_region(g.size(), 0);
  for (int v : region) in_region[v] = 1;
  // formula part must sit inside the region
  for (const auto& f : gamma.formulas)
    if (!in_region[eg.pos(f, s)]) return std::nullopt;
  for (const auto& t : gamma.traces) {
    if (!eg.universe->contains(t.source) || !eg.universe->contains(t.target))
      return std::nullopt;
  }
  // choice points: Exists positions in the region with >1 region-internal move
  std::vector<int> pts;
  std::vector<std::vector<int>> options;
  for (int v : region) {
    if (g.owner[v] != Player::Exists || g.moves[v].empty()) continue;
    std::vector<int> opts;
    for (int w : g.moves[v])
      if (in_region[w]) opts.push_back(w);
    if (opts.empty()) return std::nullopt;  // cannot stay winning
    pts.push_back(v);
    options.push_back(opts);
  }
  // iterate assignments, bounded
  std::vector<size_t> idx(pts.size(), 0);
  int tried = 0;
  for (;;) {
    if (++tried > budget.max_strategies) { exhausted = true; return std::nullopt; }
    PositionalStrategy f;
    for (size_t i = 0; i < pts.size(); ++i) f[pts[i]] = options[i][idx[i]];
    // must still be winning on the needed positions
    bool ok = true;
    std::vector<int> needed;
    for (const auto& fo : gamma.formulas) needed.push_back(eg.pos(fo, s));
    if (!audit_strategy(g, Player::Exists, needed_closure(eg, f, needed), f)) ok = false;
    if (ok) {
      for (const auto& t : gamma.traces) {
        bool h = trace_atom_holds(eg, s, f, TraceAtom(t.source, t.target, t.k, true));
        if (h != t.positive) { ok = false; break; }
      }
    }
    if (ok) return f;
    // advance
    size_t i = 0;
    while (i < idx.size()) {
      if (++idx[i] < options[i].size()) break;
      idx[i] = 0;
      ++i;
    }
    if (i == idx.size()) return std::nullopt;
  }
}

}  // namespace

bool sequent_holds(const Sequent& gamma, const KripkeModel& m, int s, const SatBudget& budget) {
  std::set<Formula> seed = gamma.formulas;
  for (const auto& t : gamma.traces) {
    seed.insert(t.source);
    seed.insert(t.target);
  }
  if (seed.empty()) return true;
  Universe u = Universe::of(seed);
  EvalGame eg = build_eval_game(u, m);
  if (gamma.traces.empty()) {
    for (const auto& f : gamma.formulas)
      if (!model_check_algebraic(m, s, f)) return false;
    return true;
  }
  bool exhausted = false;
  return find_strategy(eg, gamma, s, budget, exhausted).has_value();
}

namespace {

// canonical form check: the encoded model must be lexicographically minimal
// among permutations fixing state 0.
bool canonical_model(int n, const std::vector<std::string>& acts,
                     const std::vector<std::string>& props, uint64_t edges, uint64_t vals) {
  if (n <= 2) return true;
  std::vector<int> perm(n - 1);
  std::iota(perm.begin(), perm.end(), 1);
  const int ebits_per_act = n * n;
  do {
    std::vector<int> p(n);
    p[0] = 0;
    for (int i = 1; i < n; ++i) p[i] = perm[i - 1];
    uint64_t e2 = 0, v2 = 0;
    for (size_t a = 0; a < acts.size(); ++a)
      for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) {
          uint64_t bit = (edges >> (a * ebits_per_act + s * n + t)) & 1;
          if (bit) e2 |= 1ull << (a * ebits_per_act + p[s] * n + p[t]);
        }
    for (size_t q = 0; q < props.size(); ++q)
      for (int s = 0; s < n; ++s) {
        uint64_t bit = (vals >> (q * n + s)) & 1;
        if (bit) v2 |= 1ull << (q * n + p[s]);
      }
    if (e2 < edges || (e2 == edges && v2 < vals)) return false;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return true;
}

}  // namespace

SatResult sequent_satisfiable_bounded(const Sequent& gamma, int max_states,
                                      const SatBudget& budget) {
  SatResult res;
  Vocabulary voc = vocabulary(gamma);
  std::vector<std::string> acts(voc.action_bases.begin(), voc.action_bases.end());
  std::vector<std::string> props(voc.props.begin(), voc.props.end());
  int checked = 0;
  for (int n = 1; n <= max_states; ++n) {
    int ebits = (int)acts.size() * n * n;
    int vbits = (int)props.size() * n;
    if (ebits + vbits > 62) { res.exhaustive = false; break; }
    uint64_t emax = 1ull << ebits, vmax = 1ull << vbits;
    for (uint64_t vals = 0; vals < vmax; ++vals) {
      for (uint64_t edges = 0; edges < emax; ++edges) {
        if (!canonical_model(n, acts, props, edges, vals)) continue;
        if (++checked > budget.max_models) {
          res.exhaustive = false;
          return res;
        }
        KripkeModel m;
        for (int i = 0; i < n; ++i) m.add_state("s" + std::to_string(i));
        for (size_t a = 0; a < acts.size(); ++a)
          for (int s = 0; s < n; ++s)
            for (int t = 0; t < n; ++t)
              if ((edges >> (a * n * n + s * n + t)) & 1) m.add_edge(s, acts[a], t);
        for (size_t q = 0; q < props.size(); ++q)
          for (int s = 0; s < n; ++s)
            if ((vals >> (q * n + s)) & 1) m.set_prop(props[q], s);
        if (gamma.traces.empty()) {
          bool all = true;
          for (const auto& f : gamma.formulas)
            if (!model_check_algebraic(m, 0, f)) { all = false; break; }
          if (all) {
            // strategy witness from the evaluation game
            SatWitness w;
            w.model = m;
            w.state = 0;
            if (!gamma.formulas.empty()) {
              Universe u = Universe::of(gamma.formulas);
              EvalGame eg = build_eval_game(u, m);
              w.strategy = solve_parity_game(eg.game).strategy_exists;
            }
            res.witness = std::move(w);
            return res;
          }
        } else {
          std::set<Formula> seed = gamma.formulas;
          for (const auto& t : gamma.traces) {
            seed.insert(t.source);
            seed.insert(t.target);
          }
          Universe u = Universe::of(seed);
          EvalGame eg = build_eval_game(u, m);
          bool exhausted = false;
          auto f = find_strategy(eg, gamma, 0, budget, exhausted);
          if (exhausted) res.exhaustive = false;
          if (f) {
            res.witness = SatWitness{m, 0, *f};
            return res;
          }
        }
      }
    }
  }
  return res;
}

}  // namespace mu2
