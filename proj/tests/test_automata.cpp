#include "doctest.h"
#include "mu2/automata.hpp"
#include "mu2/formula.hpp"

#include <functional>
#include <random>

using namespace mu2;

namespace {

EpsAutomaton buchi_example() {
  // q0 (prio 1): a -> {q0, q1}, b -> {q0}; q1 (prio 2): a -> {q1}
  EpsAutomaton a;
  int la = a.add_letter("a"), lb = a.add_letter("b");
  int q0 = a.add_state("q0", 1), q1 = a.add_state("q1", 2);
  a.add_basic(q0, la, q0);
  a.add_basic(q0, la, q1);
  a.add_basic(q0, lb, q0);
  a.add_basic(q1, la, q1);
  a.initial = q0;
  return a;
}

EpsAutomaton random_automaton(std::mt19937& rng) {
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  EpsAutomaton a;
  int nl = pick(1, 3), ns = pick(1, 5);
  for (int i = 0; i < nl; ++i) a.add_letter(std::string(1, 'a' + i));
  for (int i = 0; i < ns; ++i) a.add_state("q" + std::to_string(i), pick(1, 4));
  a.initial = 0;
  for (int q = 0; q < ns; ++q) {
    for (int z = 0; z < nl; ++z) {
      int deg = pick(0, 2);
      for (int j = 0; j < deg; ++j) a.add_basic(q, z, pick(0, ns - 1));
    }
    // the initial state stays eps-free
    if (q != a.initial && pick(0, 2) == 0) a.add_eps(q, pick(0, ns - 1));
  }
  return a;
}

}  // namespace

TEST_CASE("eps closures") {
  EpsAutomaton a;
  a.add_letter("z");
  int q0 = a.add_state("q0", 1);
  int q1 = a.add_state("q1", 3);
  int q2 = a.add_state("q2", 1);
  a.initial = q0;

  for (int k = 1; k <= 4; ++k) CHECK(eps_closure_k(a, q0, k).empty());

  a.add_eps(q0, q1);
  CHECK(eps_closure_k(a, q0, 3) == std::vector<int>{q1});
  CHECK(eps_closure_k(a, q0, 1).empty());

  // chain q0 -> q1 -> q2: max over the path is 3
  a.add_eps(q1, q2);
  auto c3 = eps_closure_k(a, q0, 3);
  CHECK(std::count(c3.begin(), c3.end(), q2) == 1);

  // chain with priorities 2 then 1
  EpsAutomaton b;
  b.add_letter("z");
  int r0 = b.add_state("r0", 1), r1 = b.add_state("r1", 2), r2 = b.add_state("r2", 1);
  b.initial = r0;
  b.add_eps(r0, r1);
  b.add_eps(r1, r2);
  auto c = eps_closure_k(b, r0, 2);
  CHECK(std::count(c.begin(), c.end(), r2) == 1);
  CHECK(eps_closure_k(b, r0, 1).empty());
}

TEST_CASE("stack order and subwords") {
  Name x(2, 0), y(2, 1), z(0, 0);
  Control theta;
  theta.append(x);
  theta.append(y);
  theta.append(z);

  CHECK(stack_order(theta, {x, y}, {x}) == StackOrd::Less);  // proper extension
  CHECK(stack_order(theta, {x}, {x}) == StackOrd::Equal);
  CHECK(stack_order(theta, {x}, {y}) == StackOrd::Less);  // x before y in theta
  CHECK(stack_order(theta, {y}, {x}) == StackOrd::Greater);
  // tier-wise extension beats lexicographic: crop at 2 gives [x y] vs [x],
  // so [x y] extends and is smaller even though z is theta-later than y
  CHECK(stack_order(theta, {x, y}, {x, z}) == StackOrd::Less);

  Control sub1;  // empty
  CHECK(is_subword(sub1, theta));
  Control sub2; sub2.append(x); sub2.append(z);
  CHECK(is_subword(sub2, theta));
  Control sub3; sub3.append(z); sub3.append(x);
  CHECK(!is_subword(sub3, theta));
}

TEST_CASE("safra step on the one-state loop") {
  EpsAutomaton a;
  int lz = a.add_letter("z");
  int q = a.add_state("q", 2);
  a.add_basic(q, lz, q);
  a.initial = q;

  SafraState s0 = safra_initial(a, q);
  CHECK(s0.entries.size() == 1);
  CHECK(s0.entries[0].second.empty());

  SafraState s1 = safra_step(a, s0, [&](int st) { return a.basic[st][lz]; });
  s1.check_wellformed(a);
  REQUIRE(s1.entries.size() == 1);
  CHECK(s1.entries[0].first == q);
  CHECK(s1.entries[0].second == Stack{Name(2, 0)});  // fresh 2-name via cover
  CHECK(s1.green.empty());

  SafraState s2 = safra_step(a, s1, [&](int st) { return a.basic[st][lz]; });
  s2.check_wellformed(a);
  // the older name becomes invisible under the fresh cover and resets green
  REQUIRE(s2.entries.size() == 1);
  CHECK(s2.entries[0].second == Stack{Name(2, 0)});
  CHECK(s2.green.count(Name(2, 0)) == 1);

  SafraState s3 = safra_step(a, s2, [&](int st) { return a.basic[st][lz]; });
  CHECK(s3 == s2);  // fixpoint
}

TEST_CASE("thin removes the weaker entry") {
  EpsAutomaton a;
  int lz = a.add_letter("z");
  int q0 = a.add_state("q0", 2);
  int q1 = a.add_state("q1", 2);
  int q2 = a.add_state("q2", 1);
  a.add_basic(q0, lz, q2);
  a.add_basic(q1, lz, q2);
  a.initial = q0;

  SafraState s;
  s.entries.push_back({q0, Stack{Name(2, 0)}});
  s.entries.push_back({q1, Stack{Name(2, 1)}});
  s.control.append(Name(2, 0));
  s.control.append(Name(2, 1));

  SafraState t = safra_step(a, s, [&](int st) { return a.basic[st][lz]; });
  REQUIRE(t.entries.size() == 1);
  CHECK(t.entries[0].first == q2);
  // the senior name x2.0 wins the thinning
  CHECK(t.entries[0].second == Stack{Name(2, 0)});
}

TEST_CASE("determinize the trivial accepting loop") {
  EpsAutomaton a;
  int lz = a.add_letter("z");
  int q = a.add_state("q", 2);
  a.add_basic(q, lz, q);
  a.initial = q;
  RabinAutomaton d = determinize(a);
  CHECK(d.states.size() >= 2);
  CHECK(lasso_accepts_rabin(d, std::vector<std::string>{}, {"z"}));
  CHECK(lasso_accepts_nondet(a, std::vector<std::string>{}, {"z"}));
}

TEST_CASE("buchi-style example") {
  EpsAutomaton a = buchi_example();
  CHECK(lasso_accepts_nondet(a, std::vector<std::string>{}, {"a"}));
  CHECK(!lasso_accepts_nondet(a, std::vector<std::string>{}, {"a", "b"}));
  CHECK(lasso_accepts_nondet(a, {"b"}, {"a"}));

  RabinAutomaton d = determinize(a);
  CHECK(lasso_accepts_rabin(d, std::vector<std::string>{}, {"a"}));
  CHECK(!lasso_accepts_rabin(d, std::vector<std::string>{}, {"a", "b"}));
  CHECK(lasso_accepts_rabin(d, {"b"}, {"a"}));
}

TEST_CASE("runs need infinitely many basic transitions") {
  // eps-only cycle with even priority but no basic transition in the cycle
  EpsAutomaton a;
  a.add_letter("z");
  int q0 = a.add_state("q0", 1);
  int q1 = a.add_state("q1", 2);
  a.add_eps(q1, q1);
  a.add_eps(q0, q1);
  a.initial = q0;
  CHECK(!lasso_accepts_nondet(a, std::vector<std::string>{}, {"z"}));

  // automaton rejecting everything: no even priorities at all
  EpsAutomaton b;
  int lz = b.add_letter("z");
  int r = b.add_state("r", 1);
  b.add_basic(r, lz, r);
  b.initial = r;
  CHECK(!lasso_accepts_nondet(b, std::vector<std::string>{}, {"z"}));
}

TEST_CASE("determinization agrees with the source on lassos") {
  std::mt19937 rng(271828);
  int done = 0;
  for (int i = 0; done < 25 && i < 100; ++i) {
    EpsAutomaton a = random_automaton(rng);
    RabinAutomaton d;
    try {
      d = determinize(a, 20000);
    } catch (const ResourceError&) {
      continue;
    }
    ++done;
    int nl = static_cast<int>(a.letters.size());
    std::function<void(std::vector<int>&, std::vector<int>&, bool)> go =
        [&](std::vector<int>& u, std::vector<int>& v, bool in_v) {
          if (!v.empty()) {
            bool x = lasso_accepts_nondet(a, u, v);
            bool y = lasso_accepts_rabin(d, u, v);
            CHECK(x == y);
          }
          if (u.size() + v.size() >= 4) return;
          for (int z = 0; z < nl; ++z) {
            if (!in_v) {
              u.push_back(z);
              go(u, v, false);
              u.pop_back();
            }
            v.push_back(z);
            go(u, v, true);
            v.pop_back();
          }
        };
    std::vector<int> u, v;
    go(u, v, false);
  }
  CHECK(done >= 20);
}

TEST_CASE("well-formedness along random safra walks") {
  std::mt19937 rng(112233);
  for (int i = 0; i < 60; ++i) {
    EpsAutomaton a = random_automaton(rng);
    SafraState s = safra_initial(a, a.initial);
    std::uniform_int_distribution<int> dz(0, (int)a.letters.size() - 1);
    for (int step = 0; step < 12; ++step) {
      int z = dz(rng);
      s = safra_step(a, s, [&](int q) { return a.basic[q][z]; });
      s.check_wellformed(a);
    }
  }
}
