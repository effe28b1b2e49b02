#include "mu2/nw2.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace mu2 {

std::string nw_rule_name(NwRule r) {
  switch (r) {
    case NwRule::Ax1: return "Ax1";
    case NwRule::Ax2: return "Ax2";
    case NwRule::Ax3: return "Ax3";
    case NwRule::Ax4: return "Ax4";
    case NwRule::RAnd: return "R&";
    case NwRule::ROr: return "R|";
    case NwRule::FpMu: return "Fp_mu";
    case NwRule::FpNu: return "Fp_nu";
    case NwRule::RDia: return "R<>";
    case NwRule::Trans: return "trans";
    case NwRule::Weak: return "weak";
    case NwRule::Cut: return "cut";
    case NwRule::TCut: return "tcut";
    case NwRule::Rep: return "rep";
  }
  return "?";
}

std::optional<NwRule> nw_rule_of(const std::string& s) {
  for (NwRule r : {NwRule::Ax1, NwRule::Ax2, NwRule::Ax3, NwRule::Ax4, NwRule::RAnd,
                   NwRule::ROr, NwRule::FpMu, NwRule::FpNu, NwRule::RDia, NwRule::Trans,
                   NwRule::Weak, NwRule::Cut, NwRule::TCut, NwRule::Rep})
    if (nw_rule_name(r) == s) return r;
  return std::nullopt;
}

bool Trail::operator<(const Trail& o) const {
  if (weight != o.weight) return weight < o.weight;
  int c = Formula::cmp(source, o.source);
  if (c != 0) return c < 0;
  return Formula::cmp(target, o.target) < 0;
}

std::set<Formula> seq_closure(const Sequent& s) {
  std::set<Formula> seed = s.formulas;
  for (const auto& t : s.traces) {
    seed.insert(t.source);
    seed.insert(t.target);
  }
  return neg_closure(seed);
}

Sequent modal_premiss(const Sequent& psi, const Formula& principal, bool relevant_only) {
  if (principal.kind() != FKind::Dia)
    throw RuleError("modal rule: principal is not a diamond");
  if (!psi.contains(principal))
    throw RuleError("modal rule: principal not in the conclusion");
  Action a = principal.action();
  Action ab = a.converse();
  std::set<Formula> clos = seq_closure(psi);

  Sequent prem;
  prem.formulas.insert(principal.body());
  std::set<Formula> boxes;  // the [a]-formulas themselves
  for (const auto& f : psi.formulas) {
    if (f == principal) continue;
    if (f.kind() == FKind::Box && f.action() == a) {
      boxes.insert(f);
      prem.formulas.insert(f.body());
    }
  }
  // backward reflection of the remaining context
  for (const auto& f : psi.formulas) {
    if (f == principal || boxes.count(f)) continue;
    Formula refl = f_dia(ab, f);
    if (clos.count(refl)) prem.formulas.insert(refl);
  }
  // trace transforms
  auto add = [&](const TraceAtom& t) {
    if (!relevant_only || is_relevant(TraceAtom(t.source, t.target, t.k, true)))
      prem.traces.insert(t);
  };
  for (const auto& t : psi.traces) {
    if (!t.positive && t.source == principal) {
      Formula box = f_box(ab, t.target);
      if (clos.count(box)) add(TraceAtom(principal.body(), box, t.k, false));
    }
    if (t.positive && t.target == principal) {
      Formula box = f_box(ab, t.source);
      if (clos.count(box)) add(TraceAtom(box, principal.body(), t.k, true));
    }
    if (!t.positive && t.source.kind() == FKind::Box && t.source.action() == a) {
      Formula box = f_box(ab, t.target);
      if (clos.count(box)) add(TraceAtom(t.source.body(), box, t.k, false));
    }
    if (t.positive && t.target.kind() == FKind::Box && t.target.action() == a) {
      Formula box = f_box(ab, t.source);
      if (clos.count(box)) add(TraceAtom(box, t.target.body(), t.k, true));
    }
  }
  return prem;
}

namespace {

Sequent with(const Sequent& s, std::initializer_list<Formula> fs,
             std::initializer_list<TraceAtom> ts = {}) {
  Sequent out = s;
  for (const auto& f : fs) out.formulas.insert(f);
  for (const auto& t : ts) out.traces.insert(t);
  return out;
}

Sequent base_of(const Sequent& s, const Formula& principal, bool keep) {
  Sequent out = s;
  if (!keep) out.formulas.erase(principal);
  return out;
}

}  // namespace

std::vector<Sequent> apply_rule_nw2(const Sequent& s, const NwRuleApp& app,
                                    const Universe& u) {
  auto need = [&](bool c, const char* what) {
    if (!c) throw RuleError(std::string("nw2 ") + nw_rule_name(app.rule) + ": " + what);
  };
  switch (app.rule) {
    case NwRule::Ax1: {
      need(app.principal.has_value(), "missing pivot");
      need(s.contains(*app.principal) && s.contains(negate(*app.principal)),
           "pivot and its negation must both occur");
      return {};
    }
    case NwRule::Ax2:
      need(s.contains(f_bot()), "no falsum in the sequent");
      return {};
    case NwRule::Ax3: {
      need(app.atom.has_value(), "missing trace atom");
      need(s.contains(*app.atom) && s.contains(app.atom->negated()),
           "atom and its negation must both occur");
      return {};
    }
    case NwRule::Ax4: {
      need(app.atom.has_value(), "missing trace atom");
      const TraceAtom& t = *app.atom;
      need(t.positive && t.k % 2 == 0 && t.source == t.target && s.contains(t),
           "needs phi >2k phi in the sequent");
      return {};
    }
    case NwRule::RAnd: {
      need(app.principal && app.principal->kind() == FKind::And, "principal must be a conjunction");
      need(s.contains(*app.principal), "principal not in the sequent");
      Formula p = *app.principal;
      Sequent b = base_of(s, p, app.keep_principal);
      return {with(b, {p.left(), p.right()},
                   {TraceAtom(p, p.left(), 1), TraceAtom(p, p.right(), 1)})};
    }
    case NwRule::ROr: {
      need(app.principal && app.principal->kind() == FKind::Or, "principal must be a disjunction");
      need(s.contains(*app.principal), "principal not in the sequent");
      Formula p = *app.principal;
      Sequent b = base_of(s, p, app.keep_principal);
      return {with(b, {p.left()}, {TraceAtom(p, p.left(), 1)}),
              with(b, {p.right()}, {TraceAtom(p, p.right(), 1)})};
    }
    case NwRule::FpMu:
    case NwRule::FpNu: {
      FKind want = app.rule == NwRule::FpMu ? FKind::Mu : FKind::Nu;
      need(app.principal && app.principal->kind() == want, "principal of the wrong kind");
      need(s.contains(*app.principal), "principal not in the sequent");
      Formula p = *app.principal;
      Formula un = unfold(p);
      Sequent b = base_of(s, p, app.keep_principal);
      return {with(b, {un}, {TraceAtom(p, un, u.omega(p))})};
    }
    case NwRule::RDia: {
      need(app.principal && app.principal->kind() == FKind::Dia, "principal must be a diamond");
      return {modal_premiss(s, *app.principal, app.relevant_only)};
    }
    case NwRule::Trans: {
      need(app.atom && app.atom2, "missing trace atoms");
      const TraceAtom &t1 = *app.atom, &t2 = *app.atom2;
      need(t1.positive && t2.positive && t1.target == t2.source, "atoms do not chain");
      need(s.contains(t1) && s.contains(t2), "atoms not in the sequent");
      return {with(s, {}, {TraceAtom(t1.source, t2.target, std::max(t1.k, t2.k))})};
    }
    case NwRule::Weak: {
      Sequent out = s;
      if (app.weak_formula) {
        need(s.contains(*app.weak_formula), "weakened formula not present");
        out.formulas.erase(*app.weak_formula);
      } else if (app.weak_atom) {
        need(s.contains(*app.weak_atom), "weakened atom not present");
        out.traces.erase(*app.weak_atom);
      } else {
        need(false, "nothing to weaken");
      }
      return {out};
    }
    case NwRule::Cut: {
      need(app.cut_formula.has_value(), "missing cut formula");
      need(seq_closure(s).count(*app.cut_formula) > 0, "cut formula outside the closure");
      return {with(s, {*app.cut_formula}), with(s, {negate(*app.cut_formula)})};
    }
    case NwRule::TCut: {
      need(app.atom.has_value(), "missing trace atom");
      const TraceAtom& t = *app.atom;
      need(t.positive, "tcut takes the positive atom");
      need(t.k >= 1 && t.k <= u.k_max(), "atom priority out of range");
      auto clos = seq_closure(s);
      need(clos.count(t.source) > 0, "atom source outside the closure");
      if (app.relevant_only) need(is_relevant(t), "irrelevant trace atom");
      return {with(s, {}, {t}), with(s, {}, {t.negated()})};
    }
    case NwRule::Rep:
      throw RuleError("rep is not a rule application");
  }
  throw RuleError("unknown rule");
}

std::vector<Trail> upward_trail_relation(const Sequent& conc,
                                         const std::optional<Formula>& principal,
                                         const Sequent& prem, const Universe& u) {
  std::vector<Trail> out;
  auto identity = [&]() {
    for (const auto& f : conc.formulas)
      if (prem.contains(f)) out.push_back({f, f, 1});
  };
  if (!principal) {
    identity();
    return out;
  }
  const Formula& p = *principal;
  switch (p.kind()) {
    case FKind::Dia: {
      out.push_back({p, p.body(), 1});
      for (const auto& f : conc.formulas)
        if (f.kind() == FKind::Box && f.action() == p.action())
          out.push_back({f, f.body(), 1});
      break;
    }
    case FKind::Mu:
    case FKind::Nu:
      out.push_back({p, unfold(p), u.omega(p)});
      identity();
      break;
    case FKind::And:
    case FKind::Or: {
      if (prem.contains(p.left())) out.push_back({p, p.left(), 1});
      if (prem.contains(p.right())) out.push_back({p, p.right(), 1});
      identity();
      break;
    }
    default:
      identity();
      break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Instance enumeration

std::vector<NwInstance> enumerate_rule_instances(const Sequent& g, const Universe& u) {
  std::vector<NwInstance> out;
  auto push = [&](NwRuleApp app) {
    NwInstance inst;
    inst.conclusion = g;
    inst.app = app;
    inst.premisses = apply_rule_nw2(g, app, u);
    out.push_back(std::move(inst));
  };
  auto productive = [&](const NwInstance& inst) {
    for (const auto& p : inst.premisses)
      if (p == inst.conclusion) return false;
    return true;
  };
  // 1) axioms
  for (const auto& f : g.formulas)
    if (g.contains(negate(f))) {
      NwRuleApp a;
      a.rule = NwRule::Ax1;
      a.principal = f;
      push(a);
      break;
    }
  if (g.contains(f_bot())) {
    NwRuleApp a;
    a.rule = NwRule::Ax2;
    push(a);
  }
  for (const auto& t : g.traces)
    if (t.positive && g.contains(t.negated())) {
      NwRuleApp a;
      a.rule = NwRule::Ax3;
      a.atom = t;
      push(a);
      break;
    }
  for (const auto& t : g.traces)
    if (t.positive && t.k % 2 == 0 && t.source == t.target) {
      NwRuleApp a;
      a.rule = NwRule::Ax4;
      a.atom = t;
      push(a);
      break;
    }
  // 2) cumulative-productive logical rules, in the prover's order
  auto logical = [&](NwRule r, FKind kind) {
    for (const auto& f : g.formulas) {
      if (f.kind() != kind) continue;
      NwRuleApp a;
      a.rule = r;
      a.principal = f;
      a.keep_principal = true;
      NwInstance inst;
      inst.conclusion = g;
      inst.app = a;
      inst.premisses = apply_rule_nw2(g, a, u);
      if (productive(inst)) out.push_back(std::move(inst));
    }
  };
  logical(NwRule::ROr, FKind::Or);
  logical(NwRule::RAnd, FKind::And);
  logical(NwRule::FpMu, FKind::Mu);
  logical(NwRule::FpNu, FKind::Nu);
  for (const auto& t1 : g.traces) {
    if (!t1.positive) continue;
    for (const auto& t2 : g.traces) {
      if (!t2.positive || t1.target != t2.source) continue;
      TraceAtom comp(t1.source, t2.target, std::max(t1.k, t2.k));
      if (g.contains(comp)) continue;
      NwRuleApp a;
      a.rule = NwRule::Trans;
      a.atom = t1;
      a.atom2 = t2;
      push(a);
    }
  }
  // 3) cumulative-productive cuts over the closure; relevant tcuts
  auto clos = seq_closure(g);
  for (const auto& f : clos) {
    if (g.contains(f) || g.contains(negate(f))) continue;
    NwRuleApp a;
    a.rule = NwRule::Cut;
    a.cut_formula = f;
    push(a);
  }
  for (const auto& src : clos) {
    if (!src.has_fixpoint()) continue;
    for (const auto& tgt : closure(src)) {
      if (!tgt.has_fixpoint()) continue;
      for (int k = 1; k <= u.k_max(); ++k) {
        TraceAtom t(src, tgt, k);
        if (g.contains(t) || g.contains(t.negated())) continue;
        NwRuleApp a;
        a.rule = NwRule::TCut;
        a.atom = t;
        push(a);
      }
    }
  }
  // 4) modal rules
  for (const auto& f : g.formulas) {
    if (f.kind() != FKind::Dia) continue;
    NwRuleApp a;
    a.rule = NwRule::RDia;
    a.principal = f;
    push(a);
  }
  // 5) weakenings
  for (const auto& f : g.formulas) {
    NwRuleApp a;
    a.rule = NwRule::Weak;
    a.weak_formula = f;
    push(a);
  }
  for (const auto& t : g.traces) {
    NwRuleApp a;
    a.rule = NwRule::Weak;
    a.weak_atom = t;
    push(a);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural checks

void check_nw2_local(const NwProof& p) {
  if (p.nodes.empty()) throw RuleError("empty proof");
  // tree shape
  std::vector<int> parent(p.nodes.size(), -1);
  for (size_t i = 0; i < p.nodes.size(); ++i)
    for (int c : p.nodes[i].children) {
      if (c < 0 || c >= (int)p.nodes.size()) throw RuleError("child index out of range");
      if (parent[c] != -1) throw RuleError("node with two parents");
      parent[c] = static_cast<int>(i);
    }
  for (size_t i = 0; i < p.nodes.size(); ++i)
    if ((int)i != p.root && parent[i] == -1) throw RuleError("unreachable node");
  for (size_t i = 0; i < p.nodes.size(); ++i) {
    const auto& n = p.nodes[i];
    if (n.app.rule == NwRule::Rep) {
      if (!n.children.empty()) throw RuleError("repeat leaf with children");
      int t = n.backedge;
      if (t < 0 || t >= (int)p.nodes.size()) throw RuleError("bad back edge");
      // proper ancestor
      bool anc = false;
      for (int x = parent[i]; x != -1; x = parent[x])
        if (x == t) { anc = true; break; }
      if (!anc) throw RuleError("back edge target is not a proper ancestor");
      if (!(p.nodes[t].seq == n.seq))
        throw RuleError("repeat sequent differs from its companion");
      continue;
    }
    auto prem = apply_rule_nw2(n.seq, n.app, p.universe);
    if (prem.size() != n.children.size())
      throw RuleError("premiss count mismatch at node " + std::to_string(i));
    for (size_t j = 0; j < prem.size(); ++j)
      if (!(p.nodes[n.children[j]].seq == prem[j]))
        throw RuleError("premiss mismatch at node " + std::to_string(i));
  }
}

// ---------------------------------------------------------------------------
// Saturation

namespace {

std::optional<std::pair<TraceAtom, TraceAtom>> missing_trans(const Sequent& s) {
  for (const auto& t1 : s.traces) {
    if (!t1.positive) continue;
    for (const auto& t2 : s.traces) {
      if (!t2.positive || t1.target != t2.source) continue;
      TraceAtom comp(t1.source, t2.target, std::max(t1.k, t2.k));
      if (!s.contains(comp)) return std::make_pair(t1, t2);
    }
  }
  return std::nullopt;
}

struct Saturator {
  const NwProof& in;
  NwProof out;
  int budget;
  // stack of (orig node, sequent) -> new node id for back edges
  std::vector<std::tuple<int, Sequent, int>> stack;

  int build(int orig, const Sequent& s) {
    if (--budget < 0) throw ResourceError("saturate: node budget exhausted");
    for (const auto& [o, seq, id] : stack)
      if (o == orig && seq == s) {
        NwRuleApp rep;
        rep.rule = NwRule::Rep;
        int me = out.add(s, rep);
        out.nodes[me].backedge = id;
        return me;
      }
    const auto& node = in.nodes[orig];
    if (node.app.rule == NwRule::Rep) return build(node.backedge, s);
    // insert missing trans steps first
    if (auto mt = missing_trans(s)) {
      NwRuleApp a;
      a.rule = NwRule::Trans;
      a.atom = mt->first;
      a.atom2 = mt->second;
      auto prem = apply_rule_nw2(s, a, in.universe)[0];
      int me = out.add(s, a);
      stack.push_back({orig, s, me});
      int child = build(orig, prem);
      stack.pop_back();
      out.nodes[me].children.push_back(child);
      return me;
    }
    NwRuleApp app = node.app;
    if (app.rule == NwRule::FpMu || app.rule == NwRule::FpNu) app.keep_principal = true;
    auto prem = apply_rule_nw2(s, app, in.universe);
    int me = out.add(s, app);
    stack.push_back({orig, s, me});
    for (size_t j = 0; j < prem.size(); ++j)
      out.nodes[me].children.push_back(build(node.children[j], prem[j]));
    stack.pop_back();
    return me;
  }
};

}  // namespace

NwProof saturate(const NwProof& p, int node_budget) {
  Saturator s{p, {}, node_budget, {}};
  s.out.universe = p.universe;
  s.out.root = s.build(p.root, p.nodes[p.root].seq);
  // root is built first, so its id is 0; keep the invariant explicit
  if (s.out.root != 0) throw std::logic_error("saturate: unexpected root id");
  check_nw2_local(s.out);
  return s.out;
}

bool is_saturated(const NwProof& p) {
  for (const auto& n : p.nodes) {
    if (missing_trans(n.seq)) return false;
    if ((n.app.rule == NwRule::FpMu || n.app.rule == NwRule::FpNu) && !n.app.keep_principal)
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Tracking automaton

TrackingAutomaton::TrackingAutomaton(const Universe& u) : u_(&u) {
  for (const auto& f : u.formulas()) {
    fidx_[f] = 1 + static_cast<int>(formulas_.size());
    formulas_.push_back(f);
  }
  int base = 1 + static_cast<int>(formulas_.size());
  for (const auto& f : u.formulas())
    if (f.is_fixpoint()) {
      xidx_[f] = base + static_cast<int>(stars_.size());
      stars_.push_back(f);
    }
  int abase = base + static_cast<int>(stars_.size());
  for (const auto& src : u.formulas())
    for (const auto& tgt : u.formulas())
      for (int k = 1; k <= u.k_max(); ++k) {
        TraceAtom t(src, tgt, k);
        aidx_[t] = abase + static_cast<int>(atoms_.size());
        atoms_.push_back(t);
      }
  total_ = abase + static_cast<int>(atoms_.size());
  prio_.assign(total_, 1);
  for (size_t i = 0; i < stars_.size(); ++i) prio_[base + i] = u.omega(stars_[i]);
  for (size_t i = 0; i < atoms_.size(); ++i) prio_[abase + i] = atoms_[i].k;
  max_even_ = 0;
  for (int p : prio_)
    if (p % 2 == 0) max_even_ = std::max(max_even_, p);
  // epsilon closures: stars step to their formula, atoms to their target;
  // no chains beyond one step since formulas have no epsilon moves.
  closures_.assign(total_, {});
  for (size_t i = 0; i < stars_.size(); ++i)
    closures_[base + i] = {{1, {fidx_.at(stars_[i])}}};
  for (size_t i = 0; i < atoms_.size(); ++i)
    closures_[abase + i] = {{1, {fidx_.at(atoms_[i].target)}}};
}

int TrackingAutomaton::priority(int q) const { return prio_[q]; }

const std::vector<std::pair<int, std::vector<int>>>& TrackingAutomaton::eps_closures(
    int q) const {
  return closures_[q];
}

int TrackingAutomaton::formula_state(const Formula& f) const {
  auto it = fidx_.find(f);
  if (it == fidx_.end()) throw RuleError("tracking: formula outside the universe");
  return it->second;
}

int TrackingAutomaton::star_state(const Formula& f) const { return xidx_.at(f); }

int TrackingAutomaton::atom_state(const TraceAtom& t) const {
  auto it = aidx_.find(TraceAtom(t.source, t.target, t.k, true));
  if (it == aidx_.end()) throw RuleError("tracking: atom outside the universe");
  return it->second;
}

std::string TrackingAutomaton::state_name(int q) const {
  if (q == 0) return "init";
  int base = 1 + static_cast<int>(formulas_.size());
  int abase = base + static_cast<int>(stars_.size());
  if (q < base) return print_formula(formulas_[q - 1]);
  if (q < abase) return print_formula(stars_[q - base]) + "*";
  return atoms_[q - abase].str();
}

std::vector<int> TrackingAutomaton::delta_basic(int q, const RuleTriple& z) const {
  std::vector<int> out;
  if (q == 0) {
    out.push_back(0);
    for (const auto& f : z.prem.formulas) out.push_back(formula_state(f));
    return out;
  }
  int base = 1 + static_cast<int>(formulas_.size());
  if (q >= base) return {};  // stars and atoms have no basic moves
  const Formula& f = formulas_[q - 1];
  if (z.principal && *z.principal == f && f.is_fixpoint()) return {xidx_.at(f)};
  auto trails = upward_trail_relation(z.conc, z.principal, z.prem, *u_);
  for (const auto& tr : trails) {
    if (!(tr.source == f) || tr.weight != 1) continue;
    out.push_back(formula_state(tr.target));
    for (const auto& t : z.prem.traces) {
      if (!t.positive) continue;
      if (t.source == tr.target && z.prem.contains(t.target))
        out.push_back(atom_state(t));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TrackingAutomaton build_tracking_automaton(const Universe& u) {
  return TrackingAutomaton(u);
}

// ---------------------------------------------------------------------------
// Lasso audit

namespace {

// Effective successor structure: repeat leaves act as aliases of their
// companions.
struct Eff {
  const NwProof& p;
  int resolve(int v) const {
    while (p.nodes[v].app.rule == NwRule::Rep) v = p.nodes[v].backedge;
    return v;
  }
  std::vector<int> succ(int v) const {
    std::vector<int> out;
    for (int c : p.nodes[v].children) out.push_back(resolve(c));
    return out;
  }
};

}  // namespace

NwCheckResult nw2_lasso_audit(const NwProof& p, const NwCheckBudget& budget) {
  TrackingAutomaton aut(p.universe);
  Eff eff{p};
  int n = static_cast<int>(p.nodes.size());
  int root = eff.resolve(p.root);

  // entry paths from the root (shortest)
  std::vector<int> pred(n, -1);
  std::vector<char> seen(n, 0);
  std::deque<int> q{root};
  seen[root] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int w : eff.succ(v))
      if (!seen[w]) { seen[w] = 1; pred[w] = v; q.push_back(w); }
  }

  auto letter = [&](int from, int to) {
    return RuleTriple{p.nodes[from].seq, p.nodes[from].app.principal, p.nodes[to].seq};
  };

  // enumerate simple cycles with a DFS, capped
  int examined = 0;
  std::vector<int> path;
  std::vector<char> on_path(n, 0);
  std::function<NwCheckResult(int)> dfs = [&](int v) -> NwCheckResult {
    if (examined >= budget.lasso_cap) return {true, ""};
    if ((int)path.size() > budget.lasso_len) return {true, ""};
    for (int w : eff.succ(v)) {
      if (on_path[w]) {
        // cycle: path from w to v, then back
        ++examined;
        size_t at = std::find(path.begin(), path.end(), w) - path.begin();
        std::vector<int> cyc(path.begin() + at, path.end());
        // entry: root -> w
        std::vector<int> entry;
        for (int x = w; x != -1; x = pred[x]) entry.push_back(x);
        std::reverse(entry.begin(), entry.end());
        std::vector<RuleTriple> word;
        std::vector<int> ui, vi;
        for (size_t i = 0; i + 1 < entry.size(); ++i) {
          word.push_back(letter(entry[i], entry[i + 1]));
          ui.push_back((int)word.size() - 1);
        }
        for (size_t i = 0; i < cyc.size(); ++i) {
          word.push_back(letter(cyc[i], cyc[(i + 1) % cyc.size()]));
          vi.push_back((int)word.size() - 1);
        }
        // materialize an explicit automaton over exactly these letters
        EpsAutomaton mat;
        for (size_t i = 0; i < word.size(); ++i) mat.add_letter("z" + std::to_string(i));
        for (int s = 0; s < aut.num_states(); ++s)
          mat.add_state(aut.state_name(s), aut.priority(s));
        mat.initial = aut.init_state();
        for (int s = 0; s < aut.num_states(); ++s) {
          for (size_t i = 0; i < word.size(); ++i)
            for (int t : aut.delta_basic(s, word[i])) mat.add_basic(s, (int)i, t);
          for (const auto& [k, ts] : aut.eps_closures(s)) {
            (void)k;
            for (int t : ts) mat.add_eps(s, t);
          }
        }
        if (!lasso_accepts_nondet(mat, ui, vi)) {
          std::ostringstream os;
          os << "branch without a mu-trail; cycle through nodes";
          for (int x : cyc) os << " " << x;
          return {false, os.str()};
        }
        continue;
      }
      path.push_back(w);
      on_path[w] = 1;
      auto r = dfs(w);
      on_path[w] = 0;
      path.pop_back();
      if (!r.valid) return r;
    }
    return {true, ""};
  };
  path.push_back(root);
  on_path[root] = 1;
  return dfs(root);
}

}  // namespace mu2
