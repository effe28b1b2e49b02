#include <algorithm>
#include <functional>

#include "mu2/js2.hpp"

namespace mu2 {

namespace {

// Backtracking proof search in the annotated system. Moves follow the
// completeness ordering: axioms; cumulative-productive or/and/fixpoint/trans;
// cuts (iterative deepening on their count); modal rules. Annotation
// management runs eagerly after every step and repeats are discharged
// greedily.
struct Searcher {
  const Universe& u;
  ProveBudget budget;
  int nodes_left;
  JsProof out;

  // bookkeeping for the branch currently being explored
  struct LogEntry {
    Control ctl;                // control of the node's sequent
    std::optional<Name> reset;  // set when the node applies Reset
  };
  std::vector<LogEntry> branch_log;
  struct Mark {
    AnnSequent seq;   // settled sequent
    int id;           // out-node id of its rule node
    size_t log_pos;   // its position in branch_log
  };
  std::vector<Mark> spine;
  std::set<int> companions;

  explicit Searcher(const Universe& uu, const ProveBudget& b)
      : u(uu), budget(b), nodes_left(b.nodes) {}

  int emit(const AnnSequent& s, JsRuleApp app, bool log) {
    if (--nodes_left < 0) throw ResourceError("prove: node budget exhausted");
    if (log) {
      LogEntry e{s.ctl, std::nullopt};
      if (app.rule == JsRule::Reset) e.reset = app.name;
      branch_log.push_back(std::move(e));
    }
    return out.add(s, std::move(app));
  }

  int search(AnnSequent s, int depth, int cuts) {
    if (depth > budget.depth) return -1;
    size_t mark_nodes = out.nodes.size();
    size_t mark_log = branch_log.size();
    size_t mark_spine = spine.size();
    auto fail = [&]() {
      out.nodes.resize(mark_nodes);
      branch_log.resize(mark_log);
      spine.resize(mark_spine);
      return -1;
    };
    auto done = [&](int entry) {
      branch_log.resize(mark_log);
      spine.resize(mark_spine);
      return entry;
    };

    // eager annotation management
    int first = -1, prev = -1;
    for (const auto& st : eager_chain(s, u, /*clear_fixfree=*/true)) {
      int id = emit(s, st.app, true);
      if (prev >= 0) out.nodes[prev].children.push_back(id);
      if (first < 0) first = id;
      prev = id;
      s = st.result;
    }
    auto attach = [&](int id) {
      if (prev < 0) return id;
      out.nodes[prev].children.push_back(id);
      return first;
    };

    // greedy repeat discharge
    for (size_t j = 0; j < spine.size(); ++j) {
      if (!(spine[j].seq == s)) continue;
      bool ok = false;
      for (const auto& x : spine[j].seq.ctl.names) {
        if (!s.ctl.contains(x)) continue;
        bool everywhere = true, reset = false;
        for (size_t i = spine[j].log_pos; i < branch_log.size(); ++i) {
          if (!branch_log[i].ctl.contains(x)) { everywhere = false; break; }
          if (branch_log[i].reset && *branch_log[i].reset == x) reset = true;
        }
        if (everywhere && reset) { ok = true; break; }
      }
      if (ok) {
        JsRuleApp t;
        t.rule = JsRule::Token;
        int id = emit(s, t, false);
        out.nodes[id].companion = spine[j].id;
        companions.insert(spine[j].id);
        return done(attach(id));
      }
    }

    // axioms
    for (const auto& e : s.forms) {
      Formula neg = negate(e.f);
      for (const auto& e2 : s.forms)
        if (e2.f == neg) {
          JsRuleApp a;
          a.rule = JsRule::Ax1;
          a.principal = e;
          a.principal2 = e2;
          return done(attach(emit(s, a, false)));
        }
      if (e.f.kind() == FKind::Bot) {
        JsRuleApp a;
        a.rule = JsRule::Ax2;
        return done(attach(emit(s, a, false)));
      }
    }
    for (const auto& t : s.traces) {
      if (t.positive && s.contains(t.negated())) {
        JsRuleApp a;
        a.rule = JsRule::Ax3;
        a.atom = t;
        return done(attach(emit(s, a, false)));
      }
      if (t.positive && t.k % 2 == 0 && t.source == t.target) {
        JsRuleApp a;
        a.rule = JsRule::Ax4;
        a.atom = t;
        return done(attach(emit(s, a, false)));
      }
    }

    // a rule with recursive subgoals
    auto solve_rule = [&](const JsRuleApp& app) -> int {
      size_t mn = out.nodes.size();
      size_t ml = branch_log.size();
      size_t ms = spine.size();
      auto prems = apply_rule_js2(s, app, u);
      int id = emit(s, app, true);
      spine.push_back({s, id, branch_log.size() - 1});
      bool ok = true;
      for (const auto& p : prems) {
        int c = search(p, depth + 1, cuts);
        if (c < 0) { ok = false; break; }
        out.nodes[id].children.push_back(c);
      }
      spine.resize(ms);
      if (ok) return id;
      out.nodes.resize(mn);
      branch_log.resize(ml);
      return -1;
    };

    // saturation moves: the first applicable cumulative-productive one
    std::optional<JsRuleApp> sat_move;
    auto try_logical = [&](FKind kind) {
      if (sat_move) return;
      for (const auto& e : s.forms) {
        if (e.f.kind() != kind) continue;
        if (kind == FKind::Mu) {
          Formula un = unfold(e.f);
          int k = u.omega(e.f);
          Stack pre = crop(e.ann, k);
          bool present = false;
          for (const auto& e2 : s.forms)
            if (e2.f == un && e2.ann.size() == pre.size() + 1 &&
                std::equal(pre.begin(), pre.end(), e2.ann.begin()) &&
                e2.ann.back().tier == k)
              present = true;
          if (present && s.contains(TraceAtom(e.f, un, k))) continue;
          JsRuleApp a;
          a.rule = JsRule::FpMu;
          a.principal = e;
          a.name = s.ctl.fresh(k);
          sat_move = a;
          return;
        }
        JsRuleApp a;
        a.rule = kind == FKind::Or    ? JsRule::ROr
                 : kind == FKind::And ? JsRule::RAnd
                                      : JsRule::FpNu;
        a.principal = e;
        auto prems = apply_rule_js2(s, a, u);
        bool productive = false;
        for (const auto& p : prems)
          if (!(p == s)) productive = true;
        if (!productive) continue;
        sat_move = a;
        return;
      }
    };
    try_logical(FKind::Or);
    try_logical(FKind::And);
    try_logical(FKind::Mu);
    try_logical(FKind::Nu);
    if (!sat_move) {
      for (const auto& t1 : s.traces) {
        if (!t1.positive || sat_move) continue;
        for (const auto& t2 : s.traces) {
          if (!t2.positive || t1.target != t2.source) continue;
          TraceAtom comp(t1.source, t2.target, std::max(t1.k, t2.k));
          if (s.contains(comp)) continue;
          JsRuleApp a;
          a.rule = JsRule::Trans;
          a.atom = t1;
          a.atom2 = t2;
          sat_move = a;
          break;
        }
      }
    }
    if (sat_move) {
      int r = solve_rule(*sat_move);
      if (r >= 0) return done(attach(r));
      return fail();
    }

    // cuts, then modal choices
    if (cuts > 0) {
      for (const auto& f : seq_closure(s.strip())) {
        if (s.has_formula(f) || s.has_formula(negate(f))) continue;
        JsRuleApp a;
        a.rule = JsRule::Cut;
        a.cut_formula = f;
        int r = solve_rule(a);
        if (r >= 0) return done(attach(r));
      }
    }
    for (const auto& e : s.forms) {
      if (e.f.kind() != FKind::Dia) continue;
      JsRuleApp a;
      a.rule = JsRule::RDia;
      a.principal = e;
      int r = solve_rule(a);
      if (r >= 0) return done(attach(r));
    }
    return fail();
  }

  // splice discharge markers above companions, as the fold does
  void splice_discharges() {
    int counter = 0;
    for (int c : companions) {
      JsProof::Node body = out.nodes[c];
      int body_id = out.add(body.seq, body.app);
      out.nodes[body_id] = body;
      auto& d = out.nodes[c];
      d.app = JsRuleApp{};
      d.app.rule = JsRule::Discharge;
      d.token = "d" + std::to_string(counter++);
      d.children = {body_id};
      d.companion = -1;
    }
    for (auto& n : out.nodes)
      if (n.app.rule == JsRule::Token) n.token = out.nodes[n.companion].token;
  }
};

}  // namespace

ProveResult prove(const Sequent& gamma, const ProveBudget& budget, const Universe* ambient) {
  ProveResult res;
  for (const auto& f : gamma.formulas)
    if (!f.is_sentence()) throw RuleError("prove: sequent must consist of sentences");

  Universe u = ambient ? *ambient : Universe::of(gamma);

  // quick refutation at a tiny bound first
  {
    auto r = sequent_satisfiable_bounded(gamma, std::min(2, budget.model_states), budget.sat);
    if (r.found()) {
      res.status = ProveStatus::Refuted;
      res.countermodel = r.witness;
      return res;
    }
  }

  // proof search, iterative deepening over the cut allowance
  for (int cuts = 0; cuts <= budget.max_cuts; ++cuts) {
    Searcher se(u, budget);
    se.out.universe = u;
    try {
      int root = se.search(AnnSequent::of_pure(gamma), 0, cuts);
      if (root >= 0) {
        se.out.root = root;
        se.splice_discharges();
        auto check = check_cyclic_proof(se.out);
        if (!check.valid)
          throw std::logic_error("prover produced an invalid proof: " + check.reason +
                                 " at node " + std::to_string(check.node));
        res.status = ProveStatus::Proved;
        res.proof = std::move(se.out);
        return res;
      }
    } catch (const ResourceError&) {
      res.note = "search budget exhausted";
    }
  }

  // full refutation bound
  {
    auto r = sequent_satisfiable_bounded(gamma, budget.model_states, budget.sat);
    if (r.found()) {
      res.status = ProveStatus::Refuted;
      res.countermodel = r.witness;
      return res;
    }
    if (!r.exhaustive && res.note.empty()) res.note = "model search budget exhausted";
  }
  res.status = ProveStatus::Unknown;
  return res;
}

}  // namespace mu2
