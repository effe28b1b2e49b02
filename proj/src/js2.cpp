#include "mu2/js2.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace mu2 {

std::string AnnForm::str() const {
  std::string out = print_formula(f);
  if (!ann.empty()) {
    out += "^[";
    for (size_t i = 0; i < ann.size(); ++i) {
      if (i) out += " ";
      out += ann[i].str();
    }
    out += "]";
  }
  return out;
}

bool AnnSequent::operator<(const AnnSequent& o) const {
  if (ctl.names != o.ctl.names) return ctl.names < o.ctl.names;
  if (forms != o.forms) return forms < o.forms;
  return traces < o.traces;
}

bool AnnSequent::has_formula(const Formula& f) const {
  for (const auto& a : forms)
    if (a.f == f) return true;
  return false;
}

std::vector<AnnForm> AnnSequent::entries_of(const Formula& f) const {
  std::vector<AnnForm> out;
  for (const auto& a : forms)
    if (a.f == f) out.push_back(a);
  return out;
}

Sequent AnnSequent::strip() const {
  Sequent s;
  for (const auto& a : forms) s.formulas.insert(a.f);
  s.traces = traces;
  return s;
}

void AnnSequent::check_wellformed() const {
  std::set<Name> inctl(ctl.names.begin(), ctl.names.end());
  if (inctl.size() != ctl.names.size())
    throw RuleError("annotated sequent: repeating control");
  for (const auto& a : forms) {
    if (!stack_wellformed(a.ann))
      throw RuleError("annotated sequent: malformed stack on " + a.str());
    for (const auto& n : a.ann)
      if (!inctl.count(n))
        throw RuleError("annotated sequent: name " + n.str() + " outside the control");
  }
}

std::string AnnSequent::str() const {
  std::string out = ctl.str();
  out += " |- ";
  bool first = true;
  for (const auto& a : forms) {
    if (!first) out += "; ";
    out += a.str();
    first = false;
  }
  if (!traces.empty()) {
    out += " | ";
    first = true;
    for (const auto& t : traces) {
      if (!first) out += "; ";
      out += t.str();
      first = false;
    }
  }
  return out;
}

AnnSequent AnnSequent::of_pure(const Sequent& s) {
  AnnSequent out;
  for (const auto& f : s.formulas) out.forms.insert(AnnForm(f));
  out.traces = s.traces;
  return out;
}

std::string js_rule_name(JsRule r) {
  switch (r) {
    case JsRule::Ax1: return "Ax1";
    case JsRule::Ax2: return "Ax2";
    case JsRule::Ax3: return "Ax3";
    case JsRule::Ax4: return "Ax4";
    case JsRule::RAnd: return "R&";
    case JsRule::ROr: return "R|";
    case JsRule::FpMu: return "Fp_mu";
    case JsRule::FpNu: return "Fp_nu";
    case JsRule::RDia: return "R<>";
    case JsRule::Trans: return "trans";
    case JsRule::Weak: return "weak";
    case JsRule::Thin: return "thin";
    case JsRule::Exp: return "exp";
    case JsRule::JumpO: return "jump_o";
    case JsRule::JumpE: return "jump_e";
    case JsRule::Cut: return "cut";
    case JsRule::TCut: return "tcut";
    case JsRule::Reset: return "Reset";
    case JsRule::Discharge: return "D";
    case JsRule::Token: return "token";
    case JsRule::Open: return "open";
  }
  return "?";
}

std::optional<JsRule> js_rule_of(const std::string& s) {
  for (JsRule r : {JsRule::Ax1, JsRule::Ax2, JsRule::Ax3, JsRule::Ax4, JsRule::RAnd,
                   JsRule::ROr, JsRule::FpMu, JsRule::FpNu, JsRule::RDia, JsRule::Trans,
                   JsRule::Weak, JsRule::Thin, JsRule::Exp, JsRule::JumpO, JsRule::JumpE,
                   JsRule::Cut, JsRule::TCut, JsRule::Reset, JsRule::Discharge,
                   JsRule::Token, JsRule::Open})
    if (js_rule_name(r) == s) return r;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Rule application

namespace {

AnnSequent base_of(const AnnSequent& s, const AnnForm& principal, bool keep) {
  AnnSequent out = s;
  if (!keep) out.forms.erase(principal);
  return out;
}

}  // namespace

std::vector<AnnSequent> apply_rule_js2(const AnnSequent& s, const JsRuleApp& app,
                                       const Universe& u) {
  auto need = [&](bool c, const std::string& what) {
    if (!c) throw RuleError("js2 " + js_rule_name(app.rule) + ": " + what);
  };
  switch (app.rule) {
    case JsRule::Ax1: {
      need(app.principal && app.principal2, "missing pivots");
      need(s.contains(*app.principal) && s.contains(*app.principal2),
           "pivots must occur in the sequent");
      need(negate(app.principal->f) == app.principal2->f, "pivots are not dual");
      return {};
    }
    case JsRule::Ax2: {
      need(s.has_formula(f_bot()), "no falsum");
      return {};
    }
    case JsRule::Ax3: {
      need(app.atom.has_value(), "missing atom");
      need(s.contains(*app.atom) && s.contains(app.atom->negated()),
           "atom and negation must both occur");
      return {};
    }
    case JsRule::Ax4: {
      need(app.atom.has_value(), "missing atom");
      const TraceAtom& t = *app.atom;
      need(t.positive && t.k % 2 == 0 && t.source == t.target && s.contains(t),
           "needs phi >2k phi");
      return {};
    }
    case JsRule::RAnd: {
      need(app.principal && app.principal->f.kind() == FKind::And, "principal must be And");
      need(s.contains(*app.principal), "principal entry missing");
      Formula p = app.principal->f;
      const Stack& sg = app.principal->ann;
      AnnSequent b = base_of(s, *app.principal, app.keep_principal);
      b.forms.insert(AnnForm(p.left(), sg));
      b.forms.insert(AnnForm(p.right(), sg));
      b.traces.insert(TraceAtom(p, p.left(), 1));
      b.traces.insert(TraceAtom(p, p.right(), 1));
      return {b};
    }
    case JsRule::ROr: {
      need(app.principal && app.principal->f.kind() == FKind::Or, "principal must be Or");
      need(s.contains(*app.principal), "principal entry missing");
      Formula p = app.principal->f;
      const Stack& sg = app.principal->ann;
      AnnSequent b = base_of(s, *app.principal, app.keep_principal);
      AnnSequent l = b, r = b;
      l.forms.insert(AnnForm(p.left(), sg));
      l.traces.insert(TraceAtom(p, p.left(), 1));
      r.forms.insert(AnnForm(p.right(), sg));
      r.traces.insert(TraceAtom(p, p.right(), 1));
      return {l, r};
    }
    case JsRule::FpMu: {
      need(app.principal && app.principal->f.kind() == FKind::Mu, "principal must be Mu");
      need(s.contains(*app.principal), "principal entry missing");
      need(app.name.has_value(), "missing fresh name");
      Formula p = app.principal->f;
      int k = u.omega(p);
      need(app.name->tier == k, "name tier must match the priority");
      need(!s.ctl.contains(*app.name), "name is not fresh");
      AnnSequent b = base_of(s, *app.principal, app.keep_principal);
      b.ctl.append(*app.name);
      Stack st = crop(app.principal->ann, k);
      st.push_back(*app.name);
      Formula un = unfold(p);
      b.forms.insert(AnnForm(un, st));
      b.traces.insert(TraceAtom(p, un, k));
      return {b};
    }
    case JsRule::FpNu: {
      need(app.principal && app.principal->f.kind() == FKind::Nu, "principal must be Nu");
      need(s.contains(*app.principal), "principal entry missing");
      Formula p = app.principal->f;
      int k = u.omega(p);
      AnnSequent b = base_of(s, *app.principal, app.keep_principal);
      Formula un = unfold(p);
      b.forms.insert(AnnForm(un, crop(app.principal->ann, k)));
      b.traces.insert(TraceAtom(p, un, k));
      return {b};
    }
    case JsRule::RDia: {
      need(app.principal && app.principal->f.kind() == FKind::Dia, "principal must be Dia");
      need(s.contains(*app.principal), "principal entry missing");
      Formula p = app.principal->f;
      Action a = p.action(), ab = a.converse();
      Sequent pure = s.strip();
      std::set<Formula> clos = seq_closure(pure);
      AnnSequent prem;
      prem.ctl = s.ctl;
      prem.forms.insert(AnnForm(p.body(), app.principal->ann));
      std::set<Formula> boxes;
      for (const auto& e : s.forms) {
        if (e == *app.principal) continue;
        if (e.f.kind() == FKind::Box && e.f.action() == a) {
          boxes.insert(e.f);
          prem.forms.insert(AnnForm(e.f.body(), e.ann));
        }
      }
      for (const auto& e : s.forms) {
        if (e == *app.principal || boxes.count(e.f)) continue;
        if (e.f.kind() == FKind::Box && e.f.action() == a) continue;  // twin box entry
        Formula refl = f_dia(ab, e.f);
        if (clos.count(refl)) prem.forms.insert(AnnForm(refl));  // epsilon annotation
      }
      auto add = [&](const TraceAtom& t) {
        if (!app.relevant_only || is_relevant(TraceAtom(t.source, t.target, t.k, true)))
          prem.traces.insert(t);
      };
      for (const auto& t : s.traces) {
        if (!t.positive && t.source == p) {
          Formula box = f_box(ab, t.target);
          if (clos.count(box)) add(TraceAtom(p.body(), box, t.k, false));
        }
        if (t.positive && t.target == p) {
          Formula box = f_box(ab, t.source);
          if (clos.count(box)) add(TraceAtom(box, p.body(), t.k, true));
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
      return {prem};
    }
    case JsRule::Trans: {
      need(app.atom && app.atom2, "missing atoms");
      const TraceAtom &t1 = *app.atom, &t2 = *app.atom2;
      need(t1.positive && t2.positive && t1.target == t2.source, "atoms do not chain");
      need(s.contains(t1) && s.contains(t2), "atoms not in the sequent");
      AnnSequent b = s;
      b.traces.insert(TraceAtom(t1.source, t2.target, std::max(t1.k, t2.k)));
      return {b};
    }
    case JsRule::Weak: {
      AnnSequent b = s;
      if (app.weak_form) {
        need(s.contains(*app.weak_form), "weakened entry not present");
        b.forms.erase(*app.weak_form);
      } else if (app.weak_atom) {
        need(s.contains(*app.weak_atom), "weakened atom not present");
        b.traces.erase(*app.weak_atom);
      } else {
        need(false, "nothing to weaken");
      }
      return {b};
    }
    case JsRule::Thin: {
      need(app.weak_form.has_value(), "missing entry to thin");
      need(s.contains(*app.weak_form), "entry not present");
      const AnnForm& drop = *app.weak_form;
      bool smaller_exists = false;
      for (const auto& e : s.forms)
        if (e.f == drop.f && e.ann != drop.ann &&
            stack_order(s.ctl, e.ann, drop.ann) == StackOrd::Less)
          smaller_exists = true;
      need(smaller_exists, "no theta-smaller copy to keep");
      AnnSequent b = s;
      b.forms.erase(drop);
      return {b};
    }
    case JsRule::Exp: {
      need(app.new_ctl.has_value(), "missing premiss control");
      need(is_subword(*app.new_ctl, s.ctl), "premiss control is not a subword");
      AnnSequent b = s;
      b.ctl = *app.new_ctl;
      if (app.exp_from) {
        need(app.exp_to.has_value(), "missing target stack");
        need(s.contains(*app.exp_from), "entry not present");
        Control from_ctl, to_ctl;
        from_ctl.names = app.exp_from->ann;
        to_ctl.names = *app.exp_to;
        need(is_subword(to_ctl, from_ctl), "target stack is not a subword");
        b.forms.erase(*app.exp_from);
        b.forms.insert(AnnForm(app.exp_from->f, *app.exp_to));
      }
      b.check_wellformed();  // all used names still covered
      return {b};
    }
    case JsRule::JumpO:
    case JsRule::JumpE: {
      need(app.atom && app.jump_source, "missing atom or source");
      const TraceAtom& t = *app.atom;
      need(t.positive && s.contains(t), "atom not in the sequent");
      bool even = app.rule == JsRule::JumpE;
      need((t.k % 2 == 0) == even, even ? "atom priority must be even"
                                        : "atom priority must be odd");
      need(app.jump_source->f == t.source && s.contains(*app.jump_source),
           "source entry must carry the atom's source");
      need(s.has_formula(t.target), "target formula must already occur");
      AnnSequent b = s;
      Stack st = crop(app.jump_source->ann, t.k);
      if (even) {
        need(app.name.has_value(), "missing fresh name");
        need(app.name->tier == t.k, "name tier must match the atom");
        need(!s.ctl.contains(*app.name), "name is not fresh");
        b.ctl.append(*app.name);
        st.push_back(*app.name);
      }
      b.forms.insert(AnnForm(t.target, st));
      return {b};
    }
    case JsRule::Cut: {
      need(app.cut_formula.has_value(), "missing cut formula");
      need(seq_closure(s.strip()).count(*app.cut_formula) > 0,
           "cut formula outside the closure");
      AnnSequent l = s, r = s;
      l.forms.insert(AnnForm(*app.cut_formula));
      r.forms.insert(AnnForm(negate(*app.cut_formula)));
      return {l, r};
    }
    case JsRule::TCut: {
      need(app.atom.has_value(), "missing atom");
      const TraceAtom& t = *app.atom;
      need(t.positive, "tcut takes the positive atom");
      need(t.k >= 1 && t.k <= u.k_max(), "atom priority out of range");
      need(seq_closure(s.strip()).count(t.source) > 0, "atom source outside the closure");
      if (app.relevant_only) need(is_relevant(t), "irrelevant trace atom");
      AnnSequent l = s, r = s;
      l.traces.insert(t);
      r.traces.insert(t.negated());
      return {l, r};
    }
    case JsRule::Reset: {
      need(app.name.has_value(), "missing name");
      const Name& x = *app.name;
      need(s.ctl.contains(x), "name not in the control");
      AnnSequent b = s;
      b.forms.clear();
      int affected = 0;
      for (const auto& e : s.forms) {
        auto it = std::find(e.ann.begin(), e.ann.end(), x);
        if (it == e.ann.end()) {
          b.forms.insert(e);
          continue;
        }
        ++affected;
        size_t pos = it - e.ann.begin();
        need(pos + 1 < e.ann.size() && e.ann[pos + 1].tier == x.tier,
             "name must be followed by a same-tier name in every stack");
        Stack st(e.ann.begin(), e.ann.begin() + pos + 1);
        b.forms.insert(AnnForm(e.f, st));
      }
      need(affected > 0, "name occurs in no annotation");
      return {b};
    }
    case JsRule::Discharge:
      return {s};
    case JsRule::Token:
    case JsRule::Open:
      throw RuleError("leaf markers are not rule applications");
  }
  throw RuleError("unknown rule");
}

// ---------------------------------------------------------------------------
// Proof checking

std::vector<int> JsProof::parents() const {
  std::vector<int> parent(nodes.size(), -1);
  for (size_t i = 0; i < nodes.size(); ++i)
    for (int c : nodes[i].children) parent[c] = static_cast<int>(i);
  return parent;
}

std::optional<Name> path_successful(const JsProof& p, const std::vector<int>& path) {
  if (path.empty()) return std::nullopt;
  const Control& first = p.nodes[path.front()].seq.ctl;
  for (const auto& x : first.names) {
    bool everywhere = true, reset = false;
    for (size_t i = 0; i < path.size(); ++i) {
      const auto& n = p.nodes[path[i]];
      if (!n.seq.ctl.contains(x)) { everywhere = false; break; }
      if (i + 1 < path.size() && n.app.rule == JsRule::Reset && n.app.name &&
          *n.app.name == x)
        reset = true;
    }
    if (everywhere && reset) return x;
  }
  return std::nullopt;
}

JsCheckResult check_cyclic_proof(const JsProof& p, bool allow_open) {
  if (p.nodes.empty()) return {false, -1, "empty proof"};
  auto parent = p.parents();
  for (size_t i = 0; i < p.nodes.size(); ++i)
    if ((int)i != p.root && parent[i] == -1)
      return {false, (int)i, "unreachable node"};
  for (size_t i = 0; i < p.nodes.size(); ++i) {
    const auto& n = p.nodes[i];
    try {
      n.seq.check_wellformed();
    } catch (const RuleError& e) {
      return {false, (int)i, e.what()};
    }
    switch (n.app.rule) {
      case JsRule::Open:
        if (!allow_open) return {false, (int)i, "open assumption"};
        continue;
      case JsRule::Token: {
        if (!n.children.empty()) return {false, (int)i, "token leaf with children"};
        int c = n.companion;
        if (c < 0 || c >= (int)p.nodes.size())
          return {false, (int)i, "bad companion reference"};
        if (p.nodes[c].app.rule != JsRule::Discharge ||
            p.nodes[c].token != n.token)
          return {false, (int)i, "companion is not the matching discharge"};
        if (!(p.nodes[c].seq == n.seq))
          return {false, (int)i, "repeat sequent differs from its companion"};
        // c must be a proper ancestor; collect the repeat path
        std::vector<int> path;
        for (int x = (int)i; x != -1; x = parent[x]) {
          path.push_back(x);
          if (x == c) break;
        }
        if (path.back() != c)
          return {false, (int)i, "companion is not a proper ancestor"};
        std::reverse(path.begin(), path.end());
        if (!path_successful(p, path))
          return {false, (int)i, "repeat path is not successful (no reset name)"};
        continue;
      }
      default: break;
    }
    std::vector<AnnSequent> prem;
    try {
      prem = apply_rule_js2(n.seq, n.app, p.universe);
    } catch (const RuleError& e) {
      return {false, (int)i, e.what()};
    }
    if (prem.size() != n.children.size())
      return {false, (int)i, "premiss count mismatch"};
    for (size_t j = 0; j < prem.size(); ++j)
      if (!(p.nodes[n.children[j]].seq == prem[j]))
        return {false, (int)i,
                "premiss mismatch: expected " + prem[j].str() + " got " +
                    p.nodes[n.children[j]].seq.str()};
  }
  return {true, -1, ""};
}

// ---------------------------------------------------------------------------
// Unfold / scs / invariance

namespace {

int copy_subtree(const JsProof& src, int v, JsProof& dst,
                 std::map<int, int>& companion_map) {
  const auto& n = src.nodes[v];
  int id = dst.add(n.seq, n.app);
  dst.nodes[id].token = n.token;
  if (n.app.rule == JsRule::Discharge) companion_map[v] = id;
  if (n.app.rule == JsRule::Token) {
    auto it = companion_map.find(n.companion);
    if (it != companion_map.end()) {
      dst.nodes[id].companion = it->second;
    } else {
      dst.nodes[id].app.rule = JsRule::Open;  // companion lost by the cut-off
      dst.nodes[id].token.clear();
    }
  }
  for (int c : n.children) {
    int cc = copy_subtree(src, c, dst, companion_map);
    dst.nodes[id].children.push_back(cc);
  }
  return id;
}

}  // namespace

JsProof unfold_prefix(const JsProof& p, int depth) {
  JsProof out = p;
  for (int round = 0; round < depth; ++round) {
    std::vector<int> tokens;
    for (size_t i = 0; i < out.nodes.size(); ++i)
      if (out.nodes[i].app.rule == JsRule::Token && out.nodes[i].companion >= 0)
        tokens.push_back((int)i);
    if (tokens.empty()) break;
    auto parent = out.parents();
    for (int t : tokens) {
      int c = out.nodes[t].companion;
      int body = out.nodes[c].children.empty() ? -1 : out.nodes[c].children[0];
      if (body < 0) continue;
      std::map<int, int> cmap;
      for (size_t j = 0; j < out.nodes.size(); ++j)
        if (out.nodes[j].app.rule == JsRule::Discharge) cmap[(int)j] = (int)j;
      int copied = copy_subtree(out, body, out, cmap);
      int par = parent[t];
      if (par < 0) { out.root = copied; continue; }
      for (int& ch : out.nodes[par].children)
        if (ch == t) ch = copied;
    }
  }
  // drop nodes that became unreachable
  std::vector<int> order;
  std::vector<int> newid(out.nodes.size(), -1);
  std::function<void(int)> mark = [&](int v) {
    if (newid[v] >= 0) return;
    newid[v] = 0;
    order.push_back(v);
    for (int c : out.nodes[v].children) mark(c);
  };
  mark(out.root);
  // companions of live tokens are live (they are ancestors, already marked)
  for (size_t i = 0; i < order.size(); ++i) newid[order[i]] = (int)i;
  JsProof packed;
  packed.universe = out.universe;
  packed.nodes.resize(order.size());
  for (size_t i = 0; i < order.size(); ++i) {
    packed.nodes[i] = out.nodes[order[i]];
    for (int& c : packed.nodes[i].children) c = newid[c];
    if (packed.nodes[i].companion >= 0)
      packed.nodes[i].companion = newid[packed.nodes[i].companion];
  }
  packed.root = newid[out.root];
  return packed;
}

std::set<int> scs(const JsProof& p, int companion) {
  // strongly connected subgraph of the tree-with-back-edges restricted to
  // descendants of the companion
  std::set<int> desc;
  std::function<void(int)> collect = [&](int v) {
    desc.insert(v);
    for (int c : p.nodes[v].children) collect(c);
  };
  collect(companion);
  // edges within desc: tree edges + token back edges
  auto succ = [&](int v) {
    std::vector<int> out;
    for (int c : p.nodes[v].children)
      if (desc.count(c)) out.push_back(c);
    if (p.nodes[v].app.rule == JsRule::Token && desc.count(p.nodes[v].companion))
      out.push_back(p.nodes[v].companion);
    return out;
  };
  // nodes on a cycle through `companion`: reachable from it and reaching it
  std::set<int> fwd, bwd;
  std::deque<int> q{companion};
  fwd.insert(companion);
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int w : succ(v))
      if (fwd.insert(w).second) q.push_back(w);
  }
  // reverse reachability
  std::map<int, std::vector<int>> rev;
  for (int v : desc)
    for (int w : succ(v)) rev[w].push_back(v);
  q.push_back(companion);
  bwd.insert(companion);
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int w : rev[v])
      if (bwd.insert(w).second) q.push_back(w);
  }
  std::set<int> out;
  for (int v : fwd)
    if (bwd.count(v)) out.insert(v);
  return out;
}

bool is_invariant(const JsProof& p) {
  auto parent = p.parents();
  for (size_t i = 0; i < p.nodes.size(); ++i) {
    if (p.nodes[i].app.rule != JsRule::Token) continue;
    int c = p.nodes[i].companion;
    std::vector<int> path;
    for (int x = (int)i; x != -1; x = parent[x]) {
      path.push_back(x);
      if (x == c) break;
    }
    std::reverse(path.begin(), path.end());
    // longest common initial segment of the controls on the repeat
    Control iota = p.nodes[path[0]].seq.ctl;
    for (int v : path) {
      const Control& t = p.nodes[v].seq.ctl;
      size_t k = 0;
      while (k < iota.names.size() && k < t.names.size() && iota.names[k] == t.names[k]) ++k;
      iota.names.resize(k);
    }
    if (!(iota == p.nodes[c].seq.ctl)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Graphs and folding

JsGraph cyclic_to_graph(const JsProof& p) {
  JsGraph g;
  g.universe = p.universe;
  // drop Discharge nodes and token leaves: tokens become edges to the
  // companion's child
  std::vector<int> repr(p.nodes.size(), -1);
  std::function<int(int)> resolve = [&](int v) -> int {
    const auto& n = p.nodes[v];
    if (n.app.rule == JsRule::Discharge) return resolve(n.children[0]);
    if (n.app.rule == JsRule::Token) return resolve(p.nodes[n.companion].children[0]);
    if (repr[v] >= 0) return repr[v];
    int id = static_cast<int>(g.nodes.size());
    repr[v] = id;
    g.nodes.push_back({n.seq, n.app, {}});
    return id;
  };
  // two passes: allocate then wire
  std::function<void(int)> wire = [&](int v) {
    const auto& n = p.nodes[v];
    if (n.app.rule == JsRule::Discharge) { wire(n.children[0]); return; }
    if (n.app.rule == JsRule::Token) return;
    int id = resolve(v);
    if (!g.nodes[id].children.empty()) return;  // already wired
    for (int c : n.children) g.nodes[id].children.push_back(resolve(c));
    for (int c : n.children) wire(c);
  };
  g.root = resolve(p.root);
  wire(p.root);
  return g;
}

JsProof fold_regular(const JsGraph& g, bool invariant_mode, int node_budget) {
  JsProof out;
  out.universe = g.universe;
  int budget = node_budget;
  int token_counter = 0;
  struct Frame {
    int gnode;
    int out_id;
  };
  std::vector<Frame> path;
  std::set<int> companions;

  std::function<int(int)> build = [&](int v) -> int {
    if (--budget < 0) {
      std::ostringstream os;
      os << "fold: budget exhausted; suffix of the offending branch:";
      size_t from = path.size() > 24 ? path.size() - 24 : 0;
      for (size_t i = from; i < path.size(); ++i) os << " " << path[i].gnode;
      throw ResourceError(os.str());
    }
    const auto& n = g.nodes[v];
    // look for the earliest ancestor occurrence of the same graph node with a
    // successful (and, in invariant mode, control-monotone) interval
    for (size_t j = 0; j < path.size(); ++j) {
      if (path[j].gnode != v) continue;
      // sequents along path[j..end] plus the current node
      std::vector<int> ids;
      for (size_t i = j; i < path.size(); ++i) ids.push_back(path[i].out_id);
      // success: a name in every control from j to the current sequent, with
      // a Reset among the rules of path[j..end)
      const Control& first = out.nodes[ids[0]].seq.ctl;
      std::optional<Name> witness;
      for (const auto& x : first.names) {
        bool everywhere = n.seq.ctl.contains(x);
        bool reset = false;
        for (int id : ids) {
          const auto& node = out.nodes[id];
          if (!node.seq.ctl.contains(x)) { everywhere = false; break; }
          if (node.app.rule == JsRule::Reset && node.app.name && *node.app.name == x)
            reset = true;
        }
        if (everywhere && reset) { witness = x; break; }
      }
      if (!witness) continue;
      if (invariant_mode) {
        const Control& theta = out.nodes[ids[0]].seq.ctl;
        bool mono = is_initial_segment(theta, n.seq.ctl);
        for (int id : ids)
          if (!is_initial_segment(theta, out.nodes[id].seq.ctl)) mono = false;
        if (!mono) continue;
      }
      // close the repeat
      JsRuleApp t;
      t.rule = JsRule::Token;
      int id = out.add(n.seq, t);
      out.nodes[id].companion = ids[0];
      companions.insert(ids[0]);
      return id;
    }
    int id = out.add(n.seq, n.app);
    path.push_back({v, id});
    for (int c : n.children) out.nodes[id].children.push_back(build(c));
    path.pop_back();
    return id;
  };
  out.root = build(g.root);

  // splice a Discharge marker above every node that received repeats
  for (int c : companions) {
    JsProof::Node body = out.nodes[c];
    int body_id = out.add(body.seq, body.app);
    out.nodes[body_id] = body;
    auto& d = out.nodes[c];
    d.app = JsRuleApp{};
    d.app.rule = JsRule::Discharge;
    d.token = "d" + std::to_string(token_counter++);
    d.children = {body_id};
    d.companion = -1;
  }
  // tokens still reference the (now Discharge) companion ids; set their tokens
  for (auto& n : out.nodes)
    if (n.app.rule == JsRule::Token) n.token = out.nodes[n.companion].token;
  return out;
}

// ---------------------------------------------------------------------------
// Eager annotation management

std::vector<EagerStep> eager_chain(const AnnSequent& start, const Universe& u,
                                   bool clear_fixfree) {
  std::vector<EagerStep> steps;
  AnnSequent s = start;
  auto emit = [&](JsRuleApp app) {
    AnnSequent next = apply_rule_js2(s, app, u)[0];
    steps.push_back({app, next});
    s = next;
  };

  if (clear_fixfree) {
    for (;;) {
      std::optional<AnnForm> found;
      for (const auto& e : s.forms)
        if (!e.f.has_fixpoint() && !e.ann.empty()) { found = e; break; }
      if (!found) break;
      JsRuleApp app;
      app.rule = JsRule::Exp;
      app.exp_from = found;
      app.exp_to = Stack{};
      app.new_ctl = s.ctl;
      emit(app);
    }
  }

  // jumps, one pass over the (atom, source entry) pairs present now
  {
    std::vector<std::pair<TraceAtom, AnnForm>> pairs;
    for (const auto& t : s.traces) {
      if (!t.positive) continue;
      for (const auto& e : s.forms)
        if (e.f == t.source) pairs.push_back({t, e});
    }
    for (const auto& [t, src] : pairs) {
      if (!s.contains(src)) continue;  // may have been thinned meanwhile
      if (!s.has_formula(t.target)) continue;
      Stack pre = crop(src.ann, t.k);
      bool even = t.k % 2 == 0;
      // skip when an equivalent target entry already exists
      bool present = false;
      for (const auto& e : s.forms) {
        if (e.f != t.target) continue;
        if (!even && e.ann == pre) present = true;
        if (even && e.ann.size() == pre.size() + 1 &&
            std::equal(pre.begin(), pre.end(), e.ann.begin()) &&
            e.ann.back().tier == t.k)
          present = true;
      }
      if (present) continue;
      JsRuleApp app;
      app.rule = even ? JsRule::JumpE : JsRule::JumpO;
      app.atom = t;
      app.jump_source = src;
      if (even) app.name = s.ctl.fresh(t.k);
      emit(app);
    }
  }

  // thin to canonical form
  for (;;) {
    std::optional<AnnForm> drop;
    for (const auto& e : s.forms) {
      for (const auto& e2 : s.forms) {
        if (e.f == e2.f && e.ann != e2.ann &&
            stack_order(s.ctl, e2.ann, e.ann) == StackOrd::Less) {
          drop = e;
          break;
        }
      }
      if (drop) break;
    }
    if (!drop) break;
    JsRuleApp app;
    app.rule = JsRule::Thin;
    app.weak_form = drop;
    emit(app);
  }

  // resets, senior names first
  for (;;) {
    std::optional<Name> pick;
    for (const auto& x : s.ctl.names) {
      bool occurs = false, all_invisible = true;
      for (const auto& e : s.forms) {
        auto it = std::find(e.ann.begin(), e.ann.end(), x);
        if (it == e.ann.end()) continue;
        occurs = true;
        size_t pos = it - e.ann.begin();
        if (pos + 1 >= e.ann.size() || e.ann[pos + 1].tier != x.tier)
          all_invisible = false;
      }
      if (occurs && all_invisible) { pick = x; break; }
    }
    if (!pick) break;
    JsRuleApp app;
    app.rule = JsRule::Reset;
    app.name = pick;
    emit(app);
  }

  // drop unused control names
  {
    std::set<Name> used;
    for (const auto& e : s.forms)
      for (const auto& n : e.ann) used.insert(n);
    Control slim;
    for (const auto& n : s.ctl.names)
      if (used.count(n)) slim.names.push_back(n);
    if (!(slim == s.ctl)) {
      JsRuleApp app;
      app.rule = JsRule::Exp;
      app.new_ctl = slim;
      emit(app);
    }
  }
  return steps;
}

// ---------------------------------------------------------------------------
// Translation from NW2

namespace {

struct Translator {
  const NwProof& d;
  const Universe& u;
  JsGraph g;
  std::map<std::pair<int, AnnSequent>, int> memo;

  int resolve_orig(int v) const {
    while (d.nodes[v].app.rule == NwRule::Rep) v = d.nodes[v].backedge;
    return v;
  }

  JsRuleApp lift(const NwProof::Node& n, const AnnSequent& s) const {
    JsRuleApp app;
    app.relevant_only = n.app.relevant_only;
    auto entry = [&](const Formula& f) {
      auto es = s.entries_of(f);
      if (es.empty()) throw RuleError("translate: principal lost: " + print_formula(f));
      return es.front();  // unique after thinning
    };
    switch (n.app.rule) {
      case NwRule::Ax1:
        app.rule = JsRule::Ax1;
        app.principal = entry(*n.app.principal);
        app.principal2 = entry(negate(*n.app.principal));
        break;
      case NwRule::Ax2: app.rule = JsRule::Ax2; break;
      case NwRule::Ax3: app.rule = JsRule::Ax3; app.atom = n.app.atom; break;
      case NwRule::Ax4: app.rule = JsRule::Ax4; app.atom = n.app.atom; break;
      case NwRule::RAnd:
        app.rule = JsRule::RAnd;
        app.principal = entry(*n.app.principal);
        app.keep_principal = n.app.keep_principal;
        break;
      case NwRule::ROr:
        app.rule = JsRule::ROr;
        app.principal = entry(*n.app.principal);
        app.keep_principal = n.app.keep_principal;
        break;
      case NwRule::FpMu:
        app.rule = JsRule::FpMu;
        app.principal = entry(*n.app.principal);
        app.keep_principal = n.app.keep_principal;
        app.name = s.ctl.fresh(u.omega(*n.app.principal));
        break;
      case NwRule::FpNu:
        app.rule = JsRule::FpNu;
        app.principal = entry(*n.app.principal);
        app.keep_principal = n.app.keep_principal;
        break;
      case NwRule::RDia:
        app.rule = JsRule::RDia;
        app.principal = entry(*n.app.principal);
        break;
      case NwRule::Trans:
        app.rule = JsRule::Trans;
        app.atom = n.app.atom;
        app.atom2 = n.app.atom2;
        break;
      case NwRule::Weak:
        app.rule = JsRule::Weak;
        if (n.app.weak_formula) app.weak_form = entry(*n.app.weak_formula);
        else app.weak_atom = n.app.weak_atom;
        break;
      case NwRule::Cut:
        app.rule = JsRule::Cut;
        app.cut_formula = n.app.cut_formula;
        break;
      case NwRule::TCut:
        app.rule = JsRule::TCut;
        app.atom = n.app.atom;
        break;
      case NwRule::Rep:
        throw RuleError("translate: unexpected repeat");
    }
    return app;
  }

  // settle a sequent with the eager block, emitting graph nodes; returns the
  // id of the first node of the chain and the settled sequent via out-params
  int build(int orig, const AnnSequent& settled) {
    orig = resolve_orig(orig);
    auto key = std::make_pair(orig, settled);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    int id = static_cast<int>(g.nodes.size());
    memo[key] = id;
    const auto& n = d.nodes[orig];
    JsRuleApp app = lift(n, settled);
    g.nodes.push_back({settled, app, {}});
    auto prems = apply_rule_js2(settled, app, u);
    for (size_t j = 0; j < prems.size(); ++j) {
      // eager chain on the premiss
      auto steps = eager_chain(prems[j], u, false);
      AnnSequent cur = prems[j];
      int child_entry = -1;
      int prev = -1;
      for (const auto& st : steps) {
        int cid = static_cast<int>(g.nodes.size());
        g.nodes.push_back({cur, st.app, {}});
        if (prev >= 0) g.nodes[prev].children.push_back(cid);
        if (child_entry < 0) child_entry = cid;
        prev = cid;
        cur = st.result;
      }
      int leaf = build(n.children[j], cur);
      if (prev >= 0) {
        g.nodes[prev].children.push_back(leaf);
      } else {
        child_entry = leaf;
      }
      g.nodes[id].children.push_back(child_entry);
    }
    return id;
  }
};

}  // namespace

JsGraph translate_nw2_to_js2(const NwProof& p) {
  if (!is_saturated(p)) throw RuleError("translate: proof is not saturated");
  Translator tr{p, p.universe, {}, {}};
  tr.g.universe = p.universe;
  AnnSequent root = AnnSequent::of_pure(p.nodes[p.root].seq);
  auto steps = eager_chain(root, p.universe, false);
  // the root chain (usually empty: a pure sequent has nothing to manage)
  int first = -1, prev = -1;
  AnnSequent cur = root;
  for (const auto& st : steps) {
    int cid = static_cast<int>(tr.g.nodes.size());
    tr.g.nodes.push_back({cur, st.app, {}});
    if (prev >= 0) tr.g.nodes[prev].children.push_back(cid);
    if (first < 0) first = cid;
    prev = cid;
    cur = st.result;
  }
  int body = tr.build(p.root, cur);
  if (prev >= 0) {
    tr.g.nodes[prev].children.push_back(body);
    tr.g.root = first;
  } else {
    tr.g.root = body;
  }
  return tr.g;
}

// ---------------------------------------------------------------------------
// Stripping back to NW2

NwProof strip_js2_to_nw2(const JsProof& p) {
  NwProof out;
  out.universe = p.universe;
  auto spliced = [&](const JsProof::Node& n) {
    switch (n.app.rule) {
      case JsRule::Exp:
      case JsRule::JumpO:
      case JsRule::JumpE:
      case JsRule::Reset:
      case JsRule::Thin:
      case JsRule::Discharge:
        return true;
      case JsRule::Weak: {
        // degenerate when a twin annotated copy keeps the formula alive
        if (n.app.weak_form) {
          const auto& e = *n.app.weak_form;
          for (const auto& other : n.seq.forms)
            if (other.f == e.f && other.ann != e.ann) return true;
        }
        return false;
      }
      default:
        return false;
    }
  };
  // pass 1: representatives
  std::vector<int> repr(p.nodes.size(), -1);
  std::function<int(int)> find_repr = [&](int v) -> int {
    if (repr[v] >= 0) return repr[v];
    const auto& n = p.nodes[v];
    if (n.app.rule != JsRule::Token && spliced(n)) return repr[v] = find_repr(n.children[0]);
    // allocate
    NwRuleApp app;
    switch (n.app.rule) {
      case JsRule::Ax1: app.rule = NwRule::Ax1; app.principal = n.app.principal->f; break;
      case JsRule::Ax2: app.rule = NwRule::Ax2; break;
      case JsRule::Ax3: app.rule = NwRule::Ax3; app.atom = n.app.atom; break;
      case JsRule::Ax4: app.rule = NwRule::Ax4; app.atom = n.app.atom; break;
      case JsRule::RAnd: app.rule = NwRule::RAnd; app.principal = n.app.principal->f; break;
      case JsRule::ROr: app.rule = NwRule::ROr; app.principal = n.app.principal->f; break;
      case JsRule::FpMu: app.rule = NwRule::FpMu; app.principal = n.app.principal->f; break;
      case JsRule::FpNu: app.rule = NwRule::FpNu; app.principal = n.app.principal->f; break;
      case JsRule::RDia:
        app.rule = NwRule::RDia;
        app.principal = n.app.principal->f;
        app.relevant_only = n.app.relevant_only;
        break;
      case JsRule::Trans: app.rule = NwRule::Trans; app.atom = n.app.atom; app.atom2 = n.app.atom2; break;
      case JsRule::Weak:
        app.rule = NwRule::Weak;
        if (n.app.weak_form) app.weak_formula = n.app.weak_form->f;
        else app.weak_atom = n.app.weak_atom;
        break;
      case JsRule::Cut: app.rule = NwRule::Cut; app.cut_formula = n.app.cut_formula; break;
      case JsRule::TCut:
        app.rule = NwRule::TCut;
        app.atom = n.app.atom;
        app.relevant_only = n.app.relevant_only;
        break;
      case JsRule::Token: app.rule = NwRule::Rep; break;
      case JsRule::Open: throw RuleError("strip: open assumption");
      default: throw RuleError("strip: unexpected rule");
    }
    int id = out.add(p.nodes[v].seq.strip(), app);
    return repr[v] = id;
  };
  std::function<void(int)> walk = [&](int v) {
    const auto& n = p.nodes[v];
    if (n.app.rule != JsRule::Token && spliced(n)) { walk(n.children[0]); return; }
    int id = find_repr(v);
    if (n.app.rule == JsRule::Token) {
      out.nodes[id].backedge = find_repr(n.companion);
      return;
    }
    for (size_t j = 0; j < n.children.size(); ++j) {
      walk(n.children[j]);
      out.nodes[id].children.push_back(find_repr(n.children[j]));
    }
    // fix the cumulative flag by comparing against the stripped children
    auto& app = out.nodes[id].app;
    if (app.principal &&
        (app.rule == NwRule::RAnd || app.rule == NwRule::ROr || app.rule == NwRule::FpMu ||
         app.rule == NwRule::FpNu)) {
      app.keep_principal = true;
      auto prem = apply_rule_nw2(out.nodes[id].seq, app, out.universe);
      bool ok = prem.size() == out.nodes[id].children.size();
      for (size_t j = 0; ok && j < prem.size(); ++j)
        ok = prem[j] == out.nodes[out.nodes[id].children[j]].seq;
      if (!ok) app.keep_principal = false;
    }
  };
  walk(p.root);
  out.root = find_repr(p.root);
  return out;
}

// ---------------------------------------------------------------------------
// The authoritative NW2 proof check: local validity, the bounded lasso audit,
// then translation to the annotated system and folding.

NwCheckResult check_nw2_regular_proof(const NwProof& p, const NwCheckBudget& budget) {
  try {
    check_nw2_local(p);
  } catch (const RuleError& e) {
    return {false, std::string("local: ") + e.what()};
  }
  NwProof sat = p;
  if (!is_saturated(sat)) {
    try {
      sat = saturate(p);
    } catch (const ResourceError& e) {
      return {false, std::string("saturate: ") + e.what()};
    }
  }
  auto audit = nw2_lasso_audit(sat, budget);
  if (!audit.valid) return audit;
  try {
    JsGraph g = translate_nw2_to_js2(sat);
    JsProof folded = fold_regular(g, false, budget.fold_nodes);
    auto r = check_cyclic_proof(folded);
    if (!r.valid) return {false, "folded proof fails its own check: " + r.reason};
  } catch (const ResourceError& e) {
    return {false, std::string("fold: ") + e.what()};
  } catch (const RuleError& e) {
    return {false, std::string("translate: ") + e.what()};
  }
  return {true, ""};
}

}  // namespace mu2
