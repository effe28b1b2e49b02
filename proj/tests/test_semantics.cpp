#include "doctest.h"
#include "mu2/semantics.hpp"

#include <algorithm>
#include <functional>
#include <random>

using namespace mu2;

namespace {

// Brute-force oracle: Exists' winning region by enumerating all positional
// Exists strategies and checking every Forall playthrough.
std::vector<Player> brute_force_regions(const ParityGame& g) {
  int n = g.size();
  std::vector<int> epos;
  for (int v = 0; v < n; ++v)
    if (g.owner[v] == Player::Exists && !g.moves[v].empty()) epos.push_back(v);

  std::vector<char> ewin(n, 0);
  std::vector<size_t> idx(epos.size(), 0);
  for (;;) {
    auto succ = [&](int v) -> std::vector<int> {
      if (g.owner[v] == Player::Exists) {
        for (size_t i = 0; i < epos.size(); ++i)
          if (epos[i] == v) return {g.moves[v][idx[i]]};
        return {};  // Exists stuck
      }
      return g.moves[v];
    };
    for (int start = 0; start < n; ++start) {
      if (ewin[start]) continue;
      std::vector<char> seen(n, 0);
      std::vector<int> stack{start};
      seen[start] = 1;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : succ(v))
          if (!seen[w]) { seen[w] = 1; stack.push_back(w); }
      }
      bool bad = false;
      for (int v = 0; v < n && !bad; ++v)
        if (seen[v] && g.owner[v] == Player::Exists && succ(v).empty()) bad = true;
      int maxp = 0;
      for (int v = 0; v < n; ++v) maxp = std::max(maxp, g.priority[v]);
      for (int p = 1; p <= maxp && !bad; p += 2) {
        auto inside = [&](int v) { return seen[v] && g.priority[v] <= p; };
        for (int v = 0; v < n && !bad; ++v) {
          if (!inside(v) || g.priority[v] != p) continue;
          std::vector<char> r(n, 0);
          std::vector<int> st;
          for (int w : succ(v))
            if (inside(w) && !r[w]) { r[w] = 1; st.push_back(w); }
          while (!st.empty()) {
            int x = st.back();
            st.pop_back();
            for (int w : succ(x))
              if (inside(w) && !r[w]) { r[w] = 1; st.push_back(w); }
          }
          if (r[v]) bad = true;
        }
      }
      if (!bad) ewin[start] = 1;
    }
    if (epos.empty()) break;
    size_t i = 0;
    while (i < idx.size()) {
      if (++idx[i] < g.moves[epos[i]].size()) break;
      idx[i] = 0;
      ++i;
    }
    if (i == idx.size()) break;
  }
  std::vector<Player> out(n, Player::Forall);
  for (int v = 0; v < n; ++v)
    if (ewin[v]) out[v] = Player::Exists;
  return out;
}

ParityGame random_game(std::mt19937& rng, int max_pos) {
  std::uniform_int_distribution<int> dpos(1, max_pos);
  int n = dpos(rng);
  ParityGame g;
  std::uniform_int_distribution<int> dprio(0, 4), downer(0, 1), ddeg(0, 3);
  for (int i = 0; i < n; ++i)
    g.add_position(downer(rng) ? Player::Exists : Player::Forall, dprio(rng));
  std::uniform_int_distribution<int> dtgt(0, n - 1);
  for (int i = 0; i < n; ++i) {
    int deg = ddeg(rng);
    for (int j = 0; j < deg; ++j) g.moves[i].push_back(dtgt(rng));
  }
  return g;
}

KripkeModel chain_model() {
  KripkeModel m;
  m.add_state("s0");
  m.add_state("s1");
  m.add_state("s2");
  m.add_edge(0, "a", 1);
  m.add_edge(1, "a", 2);
  m.set_prop("p", 2);
  return m;
}

KripkeModel random_model(std::mt19937& rng, int max_states) {
  std::uniform_int_distribution<int> dn(1, max_states);
  int n = dn(rng);
  KripkeModel m;
  for (int i = 0; i < n; ++i) m.add_state("s" + std::to_string(i));
  std::uniform_int_distribution<int> coin(0, 3);
  for (const char* a : {"a", "b"})
    for (int s = 0; s < n; ++s)
      for (int t = 0; t < n; ++t)
        if (coin(rng) == 0) m.add_edge(s, a, t);
  for (const char* p : {"p", "q"})
    for (int s = 0; s < n; ++s)
      if (coin(rng) < 2) m.set_prop(p, s);
  return m;
}

Formula random_sentence(std::mt19937& rng, int depth, int fix_budget,
                        std::vector<std::string> bound = {}) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  int choices = 5 + (depth > 0 ? 2 : 0) + (depth > 0 && fix_budget > 0 ? 1 : 0);
  int k = pick(choices);
  switch (k) {
    case 0: return f_bot();
    case 1: return f_top();
    case 2: return f_prop(pick(2) ? "p" : "q");
    case 3: return f_negprop(pick(2) ? "p" : "q");
    case 4:
      if (!bound.empty() && pick(2)) return f_var(bound[pick((int)bound.size())]);
      return f_prop("p");
    case 5: {
      Action a(pick(2) ? "a" : "b", pick(2) == 0);
      return pick(2) ? f_dia(a, random_sentence(rng, depth - 1, fix_budget, bound))
                     : f_box(a, random_sentence(rng, depth - 1, fix_budget, bound));
    }
    case 6: {
      Formula l = random_sentence(rng, depth - 1, fix_budget, bound);
      Formula r = random_sentence(rng, depth - 1, fix_budget, bound);
      return pick(2) ? f_or(l, r) : f_and(l, r);
    }
    default: {
      std::string v = "X" + std::to_string(bound.size());
      bound.push_back(v);
      Formula body = random_sentence(rng, depth - 1, fix_budget - 1, bound);
      return pick(2) ? f_mu(v, body) : f_nu(v, body);
    }
  }
}

}  // namespace

TEST_CASE("parity solver corner cases") {
  {
    ParityGame g;
    g.add_position(Player::Exists, 2);  // no moves: Exists stuck
    auto sol = solve_parity_game(g);
    CHECK(sol.winner[0] == Player::Forall);
  }
  {
    ParityGame g;
    g.add_position(Player::Forall, 1);  // Forall stuck
    auto sol = solve_parity_game(g);
    CHECK(sol.winner[0] == Player::Exists);
  }
  {
    ParityGame g;
    g.add_position(Player::Exists, 2);
    g.moves[0].push_back(0);
    auto sol = solve_parity_game(g);
    CHECK(sol.winner[0] == Player::Exists);
    CHECK(sol.strategy_exists.at(0) == 0);
  }
}

TEST_CASE("parity solver vs brute force") {
  std::mt19937 rng(20240817);
  for (int i = 0; i < 250; ++i) {
    ParityGame g = random_game(rng, 8);
    auto sol = solve_parity_game(g);
    auto oracle = brute_force_regions(g);
    for (int v = 0; v < g.size(); ++v) CHECK(sol.winner[v] == oracle[v]);
    CHECK(audit_strategy(g, Player::Exists, sol.region(Player::Exists), sol.strategy_exists));
    CHECK(audit_strategy(g, Player::Forall, sol.region(Player::Forall), sol.strategy_forall));
  }
}

TEST_CASE("evaluation game shape") {
  KripkeModel m = chain_model();
  Formula phi = parse_formula("mu X. p | <a>X");
  Universe u = Universe::of({phi});
  EvalGame eg = build_eval_game(u, m);

  int pp = eg.pos(f_prop("p"), 2);  // s2 has p
  CHECK(eg.game.owner[pp] == Player::Forall);
  CHECK(eg.game.moves[pp].empty());
  int pn = eg.pos(f_prop("p"), 0);
  CHECK(eg.game.owner[pn] == Player::Exists);

  Formula disj = unfold(phi);
  REQUIRE(disj.kind() == FKind::Or);
  int od = eg.pos(disj, 1);
  CHECK(eg.game.owner[od] == Player::Exists);
  CHECK(eg.game.moves[od].size() == 2);

  // converse moves: <a->p at s1 goes to predecessors of s1
  Formula back = f_dia(Action("a", true), f_prop("p"));
  Universe u2 = Universe::of({back});
  EvalGame eg2 = build_eval_game(u2, m);
  int bd = eg2.pos(back, 1);
  REQUIRE(eg2.game.moves[bd].size() == 1);
  CHECK(eg2.game.moves[bd][0] == eg2.pos(f_prop("p"), 0));
}

TEST_CASE("model_check basics") {
  KripkeModel m = chain_model();
  CHECK(model_check(m, 0, parse_formula("nu X. X")));
  CHECK(!model_check(m, 0, parse_formula("mu X. X")));
  CHECK(model_check(m, 0, parse_formula("mu X. p | <a>X")));
  CHECK(!model_check(m, 0, parse_formula("p")));
  CHECK(model_check(m, 2, parse_formula("p")));
}

TEST_CASE("algebraic semantics") {
  KripkeModel m;
  m.add_state("s");
  m.add_state("t");
  m.add_edge(0, "a", 1);
  m.set_prop("p", 0);
  // <a>[a-]p at s: move to t; every a-predecessor of t carries p
  CHECK(model_check_algebraic(m, 0, parse_formula("<a>[a-]p")));
  CHECK(!model_check_algebraic(m, 0, f_bot()));
  CHECK(model_check_algebraic(m, 0, parse_formula("nu X. X")));
  CHECK(!model_check_algebraic(m, 1, parse_formula("mu X. X")));
}

TEST_CASE("game and algebraic semantics agree") {
  std::mt19937 rng(555);
  for (int i = 0; i < 200; ++i) {
    KripkeModel m = random_model(rng, 6);
    Formula f = random_sentence(rng, 4, 2);
    for (int s = 0; s < m.n_states(); ++s)
      CHECK(model_check(m, s, f) == model_check_algebraic(m, s, f));
  }
}

TEST_CASE("converse coherence") {
  std::mt19937 rng(808);
  for (int i = 0; i < 30; ++i) {
    KripkeModel m = random_model(rng, 5);
    for (const char* ab : {"a", "b"}) {
      Action fwd(ab), bwd = fwd.converse();
      for (int s = 0; s < m.n_states(); ++s)
        for (int t : m.moves(fwd, s)) {
          auto back = m.moves(bwd, t);
          CHECK(std::count(back.begin(), back.end(), s) > 0);
        }
    }
  }
}

TEST_CASE("trace atoms") {
  KripkeModel m;
  m.add_state("s");
  m.add_edge(0, "a", 0);
  Formula nu = parse_formula("nu X. <a>X");
  Universe u = Universe::of({nu});
  EvalGame eg = build_eval_game(u, m);
  auto sol = solve_parity_game(eg.game);
  REQUIRE(sol.winner[eg.pos(nu, 0)] == Player::Exists);
  const PositionalStrategy& f = sol.strategy_exists;

  int k = u.omega(nu);
  CHECK(k % 2 == 1);
  CHECK(trace_atom_holds(eg, 0, f, TraceAtom(nu, nu, k)));
  // an even self-atom would witness a losing cycle; never under a winning f
  for (int even = 2; even <= u.max_priority() + 1; even += 2)
    CHECK(!trace_atom_holds(eg, 0, f, TraceAtom(nu, nu, even)));

  // conjunction detour of weight 1
  KripkeModel m2;
  m2.add_state("s");
  m2.set_prop("p", 0);
  m2.set_prop("q", 0);
  Formula conj = parse_formula("p & q");
  Universe u2 = Universe::of({conj});
  EvalGame eg2 = build_eval_game(u2, m2);
  auto sol2 = solve_parity_game(eg2.game);
  CHECK(trace_atom_holds(eg2, 0, sol2.strategy_exists, TraceAtom(conj, f_prop("p"), 1)));
}

TEST_CASE("bounded satisfiability") {
  {
    Sequent s(std::set<Formula>{f_prop("p"), f_negprop("p")});
    auto r = sequent_satisfiable_bounded(s, 3);
    CHECK(!r.found());
    CHECK(r.exhaustive);
  }
  {
    Sequent s(std::set<Formula>{parse_formula("nu X. <a>X")});
    auto r = sequent_satisfiable_bounded(s, 1);
    REQUIRE(r.found());
    CHECK(r.witness->model.n_states() == 1);
    CHECK(sequent_holds(s, r.witness->model, r.witness->state));
  }
  {
    // two-way validity: <a>[a-]p entails p
    Sequent s(std::set<Formula>{parse_formula("<a>[a-]p"), f_negprop("p")});
    auto r = sequent_satisfiable_bounded(s, 4);
    CHECK(!r.found());
  }
  {
    // non-validity: <a><a->p does not entail p
    Sequent s(std::set<Formula>{parse_formula("<a><a->p"), f_negprop("p")});
    auto r = sequent_satisfiable_bounded(s, 3);
    REQUIRE(r.found());
    CHECK(sequent_holds(s, r.witness->model, r.witness->state));
  }
}

TEST_CASE("satisfiability with trace atoms") {
  Formula nu = parse_formula("nu X. <a>X");
  Universe u = Universe::of({nu});
  int k = u.omega(nu);
  Sequent s(std::set<Formula>{nu}, {TraceAtom(nu, nu, k)});
  auto r = sequent_satisfiable_bounded(s, 2);
  REQUIRE(r.found());

  // the even-weight self-atom is never satisfiable
  Sequent s2(std::set<Formula>{nu}, {TraceAtom(nu, nu, k + 1)});
  auto r2 = sequent_satisfiable_bounded(s2, 2);
  CHECK(!r2.found());
}
