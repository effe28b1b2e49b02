#include "mu2/automata.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mu2/formula.hpp"  // RuleError / ResourceError

namespace mu2 {

int EpsAutomaton::add_state(const std::string& name, int priority) {
  state_names.push_back(name);
  prio.push_back(priority);
  basic.emplace_back(letters.size());
  eps.emplace_back();
  closures_ready_ = false;
  return num_states() - 1;
}

int EpsAutomaton::add_letter(const std::string& z) {
  letters.push_back(z);
  for (auto& row : basic) row.emplace_back();
  return static_cast<int>(letters.size()) - 1;
}

void EpsAutomaton::add_basic(int q, int letter, int r) {
  basic[q][letter].push_back(r);
}

void EpsAutomaton::add_eps(int q, int r) {
  eps[q].push_back(r);
  closures_ready_ = false;
}

int EpsAutomaton::letter_index(const std::string& z) const {
  for (size_t i = 0; i < letters.size(); ++i)
    if (letters[i] == z) return static_cast<int>(i);
  throw RuleError("unknown letter: " + z);
}

int EpsAutomaton::max_even() const {
  int n = 0;
  for (int p : prio)
    if (p % 2 == 0) n = std::max(n, p);
  return n;
}

void EpsAutomaton::compute_closures() const {
  int n = num_states();
  closures_.assign(n, {});
  for (int q = 0; q < n; ++q) {
    // BFS over (state, current exact max) pairs along nonempty eps paths
    std::map<int, std::set<int>> reach;  // k -> states
    std::set<std::pair<int, int>> seen;
    std::deque<std::pair<int, int>> work;
    for (int r : eps[q]) {
      auto key = std::make_pair(r, prio[r]);
      if (seen.insert(key).second) work.push_back(key);
    }
    while (!work.empty()) {
      auto [s, k] = work.front();
      work.pop_front();
      reach[k].insert(s);
      for (int r : eps[s]) {
        auto key = std::make_pair(r, std::max(k, prio[r]));
        if (seen.insert(key).second) work.push_back(key);
      }
    }
    for (auto& [k, states] : reach)
      closures_[q].push_back({k, std::vector<int>(states.begin(), states.end())});
  }
  closures_ready_ = true;
}

const std::vector<std::pair<int, std::vector<int>>>& EpsAutomaton::eps_closures(int q) const {
  if (!closures_ready_) compute_closures();
  return closures_[q];
}

std::vector<int> eps_closure_k(const EpsInterface& a, int state, int k) {
  for (const auto& [kk, states] : a.eps_closures(state))
    if (kk == k) return states;
  return {};
}

// ---------------------------------------------------------------------------
// Safra states

bool SafraState::operator<(const SafraState& o) const {
  if (entries != o.entries) return entries < o.entries;
  if (control.names != o.control.names) return control.names < o.control.names;
  return green < o.green;
}

const Stack* SafraState::stack_of(int q) const {
  for (const auto& [s, st] : entries)
    if (s == q) return &st;
  return nullptr;
}

std::string SafraState::str(const std::vector<std::string>& state_names) const {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < entries.size(); ++i) {
    if (i) os << ", ";
    if (entries[i].first < (int)state_names.size()) os << state_names[entries[i].first];
    else os << "q" << entries[i].first;
    os << "^" << stack_str(entries[i].second);
  }
  os << "} ctl=" << control.str() << " green={";
  bool first = true;
  for (const auto& n : green) {
    if (!first) os << " ";
    os << n.str();
    first = false;
  }
  os << "}";
  return os.str();
}

void SafraState::check_wellformed(const EpsInterface& a) const {
  std::set<int> seen_states;
  std::set<Name> used;
  for (const auto& [q, st] : entries) {
    if (!seen_states.insert(q).second)
      throw RuleError("safra state: two entries for one state");
    if (!stack_wellformed(st)) throw RuleError("safra state: malformed stack");
    if (crop(st, a.priority(q)) != st)
      throw RuleError("safra state: stack not cropped to the state priority");
    for (const auto& n : st) used.insert(n);
  }
  std::set<Name> inctl(control.names.begin(), control.names.end());
  if (inctl.size() != control.names.size())
    throw RuleError("safra state: repeating control");
  if (inctl != used) throw RuleError("safra state: control differs from used names");
  for (const auto& n : green)
    if (!inctl.count(n)) throw RuleError("safra state: green name not active");
  // tier bound 4m
  std::map<int, int> per_tier;
  for (const auto& n : inctl) ++per_tier[n.tier];
  for (const auto& [t, c] : per_tier)
    if (c > 4 * a.num_states())
      throw std::logic_error("safra state: tier bound exceeded");
}

SafraState safra_initial(const EpsInterface&, int initial) {
  SafraState s;
  s.entries.push_back({initial, {}});
  return s;
}

SafraState safra_step(const EpsInterface& a, const SafraState& s,
                      const std::function<std::vector<int>(int)>& delta_basic) {
  using Entry = std::pair<int, Stack>;
  Control theta = s.control;

  // Step 1: basic move.
  std::set<Entry> cur;
  for (const auto& [q, st] : s.entries)
    for (int b : delta_basic(q)) cur.insert({b, crop(st, a.priority(b))});

  auto alloc = [&](int tier) {
    Name x = theta.fresh(tier);
    theta.append(x);
    return x;
  };

  // Step 2: cover. Entries with even priority get a fresh name of that tier,
  // shared per (stack, tier).
  {
    std::set<Entry> next;
    std::map<std::pair<Stack, int>, Name> shared;
    for (const auto& [q, st] : cur) {
      int k = a.priority(q);
      if (k % 2 != 0) {
        next.insert({q, st});
        continue;
      }
      auto key = std::make_pair(st, k);
      auto it = shared.find(key);
      Name x = it != shared.end() ? it->second : (shared[key] = alloc(k));
      Stack st2 = st;
      st2.push_back(x);
      next.insert({q, st2});
    }
    cur.swap(next);
  }

  // Step 3: epsilon move, one pass over the entries present after cover.
  {
    std::vector<Entry> base(cur.begin(), cur.end());
    std::map<std::pair<Stack, int>, Name> shared;
    for (const auto& [q, st] : base) {
      for (const auto& [k, targets] : a.eps_closures(q)) {
        Stack pre = crop(st, k);
        if (k % 2 != 0) {
          for (int b : targets) cur.insert({b, pre});
        } else {
          auto key = std::make_pair(pre, k);
          auto it = shared.find(key);
          Name x = it != shared.end() ? it->second : (shared[key] = alloc(k));
          Stack st2 = pre;
          st2.push_back(x);
          for (int b : targets) cur.insert({b, st2});
        }
      }
    }
  }

  // Step 4: thin. Keep the <_theta-least stack per state.
  std::map<int, Stack> best;
  for (const auto& [q, st] : cur) {
    auto it = best.find(q);
    if (it == best.end() || stack_order(theta, st, it->second) == StackOrd::Less)
      best[q] = st;
  }

  // Step 5: reset. A k-name is visible if it is the last k-name of some
  // stack; invisible active names go green and stacks are truncated at their
  // earliest invisible name.
  std::set<Name> visible;
  for (const auto& [q, st] : best) {
    (void)q;
    std::map<int, Name> last_per_tier;
    for (const auto& n : st) last_per_tier[n.tier] = n;
    for (const auto& [t, n] : last_per_tier) visible.insert(n);
  }
  std::set<Name> invisible;
  for (const auto& n : theta.names)
    if (!visible.count(n)) invisible.insert(n);
  std::set<Name> greened;
  for (auto& [q, st] : best) {
    (void)q;
    for (size_t i = 0; i < st.size(); ++i) {
      if (invisible.count(st[i])) {
        greened.insert(st[i]);
        st.resize(i + 1);
        break;
      }
    }
  }

  // Remove names that no longer occur in any stack.
  std::set<Name> used;
  for (const auto& [q, st] : best)
    for (const auto& n : st) used.insert(n);
  SafraState out;
  for (const auto& n : theta.names)
    if (used.count(n)) out.control.append(n);
  for (const auto& [q, st] : best) out.entries.push_back({q, st});
  std::sort(out.entries.begin(), out.entries.end());
  for (const auto& n : greened)
    if (used.count(n)) out.green.insert(n);
  return out;
}

// ---------------------------------------------------------------------------
// Determinization

RabinAutomaton determinize(const EpsAutomaton& a, int max_states) {
  RabinAutomaton d;
  d.letters = a.letters;
  d.source_state_names = a.state_names;
  std::map<SafraState, int> index;
  std::deque<int> work;
  SafraState init = safra_initial(a, a.initial);
  index[init] = 0;
  d.states.push_back(init);
  d.delta.emplace_back(a.letters.size(), -1);
  work.push_back(0);
  while (!work.empty()) {
    int i = work.front();
    work.pop_front();
    for (size_t z = 0; z < a.letters.size(); ++z) {
      SafraState next = safra_step(a, d.states[i],
                                   [&](int q) { return a.basic[q][z]; });
      next.check_wellformed(a);
      auto it = index.find(next);
      int j;
      if (it == index.end()) {
        j = static_cast<int>(d.states.size());
        if (j >= max_states)
          throw ResourceError("determinize: state cap exceeded");
        index[next] = j;
        d.states.push_back(next);
        d.delta.emplace_back(a.letters.size(), -1);
        work.push_back(j);
      } else {
        j = it->second;
      }
      d.delta[i][z] = j;
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Lasso membership

namespace {

struct ProductGraph {
  // nodes: state * length + pos
  int n_states, length;
  std::vector<std::vector<std::pair<int, bool>>> succ;  // (node, is_basic)

  int node(int q, int pos) const { return q * length + pos; }
};

ProductGraph build_product(const EpsAutomaton& a, const std::vector<int>& u,
                           const std::vector<int>& v) {
  ProductGraph g;
  g.n_states = a.num_states();
  g.length = static_cast<int>(u.size() + v.size());
  g.succ.assign(g.n_states * g.length, {});
  auto letter_at = [&](int pos) {
    return pos < (int)u.size() ? u[pos] : v[pos - u.size()];
  };
  auto next_pos = [&](int pos) {
    return pos + 1 < g.length ? pos + 1 : (int)u.size();
  };
  for (int q = 0; q < g.n_states; ++q)
    for (int pos = 0; pos < g.length; ++pos) {
      int me = g.node(q, pos);
      for (int r : a.basic[q][letter_at(pos)])
        g.succ[me].push_back({g.node(r, next_pos(pos)), true});
      for (int r : a.eps[q]) g.succ[me].push_back({g.node(r, pos), false});
    }
  return g;
}

}  // namespace

bool lasso_accepts_nondet(const EpsAutomaton& a, const std::vector<int>& u,
                          const std::vector<int>& v) {
  if (v.empty()) throw RuleError("lasso period must be nonempty");
  ProductGraph g = build_product(a, u, v);
  int N = g.n_states * g.length;
  std::vector<char> reach(N, 0);
  std::deque<int> q{g.node(a.initial, 0)};
  reach[q.front()] = 1;
  while (!q.empty()) {
    int x = q.front();
    q.pop_front();
    for (auto [y, b] : g.succ[x]) {
      (void)b;
      if (!reach[y]) { reach[y] = 1; q.push_back(y); }
    }
  }
  int maxp = 0;
  for (int p : a.prio) maxp = std::max(maxp, p);
  for (int p = 0; p <= maxp; p += 2) {
    // SCCs of the reachable subgraph restricted to priority <= p
    auto inside = [&](int node) {
      return reach[node] && a.prio[node / g.length] <= p;
    };
    std::vector<int> order;
    std::vector<char> vis(N, 0);
    for (int s = 0; s < N; ++s) {
      if (!inside(s) || vis[s]) continue;
      std::vector<std::pair<int, size_t>> st{{s, 0}};
      vis[s] = 1;
      while (!st.empty()) {
        auto& [x, i] = st.back();
        if (i < g.succ[x].size()) {
          int y = g.succ[x][i].first;
          ++i;
          if (inside(y) && !vis[y]) { vis[y] = 1; st.push_back({y, 0}); }
        } else {
          order.push_back(x);
          st.pop_back();
        }
      }
    }
    std::vector<std::vector<int>> rev(N);
    for (int x = 0; x < N; ++x) {
      if (!inside(x)) continue;
      for (auto [y, b] : g.succ[x]) {
        (void)b;
        if (inside(y)) rev[y].push_back(x);
      }
    }
    std::vector<int> comp(N, -1);
    int c = 0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (comp[*it] >= 0) continue;
      std::vector<int> st{*it};
      comp[*it] = c;
      while (!st.empty()) {
        int x = st.back();
        st.pop_back();
        for (int y : rev[x])
          if (comp[y] < 0) { comp[y] = c; st.push_back(y); }
      }
      ++c;
    }
    std::vector<char> has_p(c, 0), has_basic(c, 0);
    for (int x = 0; x < N; ++x) {
      if (comp[x] < 0) continue;
      if (a.prio[x / g.length] == p) has_p[comp[x]] = 1;
      for (auto [y, b] : g.succ[x])
        if (b && comp[y] == comp[x]) has_basic[comp[x]] = 1;
    }
    for (int i = 0; i < c; ++i)
      if (has_p[i] && has_basic[i]) return true;
  }
  return false;
}

bool lasso_accepts_nondet(const EpsAutomaton& a, const std::vector<std::string>& u,
                          const std::vector<std::string>& v) {
  std::vector<int> ui, vi;
  for (const auto& z : u) ui.push_back(a.letter_index(z));
  for (const auto& z : v) vi.push_back(a.letter_index(z));
  return lasso_accepts_nondet(a, ui, vi);
}

bool lasso_accepts_rabin(const RabinAutomaton& d, const std::vector<int>& u,
                         const std::vector<int>& v) {
  if (v.empty()) throw RuleError("lasso period must be nonempty");
  int cur = d.initial;
  for (int z : u) cur = d.delta[cur][z];
  std::map<int, int> seen;  // block start state -> block index
  std::vector<int> starts;
  while (!seen.count(cur)) {
    seen[cur] = static_cast<int>(starts.size());
    starts.push_back(cur);
    for (int z : v) cur = d.delta[cur][z];
  }
  int from = seen[cur];
  // states visited on the cycle, at every letter position
  std::vector<int> cycle;
  int x = starts[from];
  for (size_t b = from; b < starts.size(); ++b) {
    for (int z : v) {
      x = d.delta[x][z];
      cycle.push_back(x);
    }
  }
  std::set<Name> candidates(d.states[cycle[0]].control.names.begin(),
                            d.states[cycle[0]].control.names.end());
  for (const auto& n : candidates) {
    bool active_everywhere = true, green_somewhere = false;
    for (int s : cycle) {
      if (!d.states[s].control.contains(n)) { active_everywhere = false; break; }
      if (d.states[s].green.count(n)) green_somewhere = true;
    }
    if (active_everywhere && green_somewhere) return true;
  }
  return false;
}

bool lasso_accepts_rabin(const RabinAutomaton& d, const std::vector<std::string>& u,
                         const std::vector<std::string>& v) {
  auto idx = [&](const std::string& z) {
    for (size_t i = 0; i < d.letters.size(); ++i)
      if (d.letters[i] == z) return static_cast<int>(i);
    throw RuleError("unknown letter: " + z);
  };
  std::vector<int> ui, vi;
  for (const auto& z : u) ui.push_back(idx(z));
  for (const auto& z : v) vi.push_back(idx(z));
  return lasso_accepts_rabin(d, ui, vi);
}

}  // namespace mu2
