#ifndef MU2_JS2_HPP
#define MU2_JS2_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mu2/formula.hpp"
#include "mu2/names.hpp"
#include "mu2/nw2.hpp"
#include "mu2/semantics.hpp"

namespace mu2 {

// An annotated formula: a formula with a name stack. The rules crop stacks
// exactly where their side conditions say so; beyond stack well-formedness no
// per-formula crop is enforced (the annotations mirror the Safra stacks of
// the tracking automaton, whose formula states all carry priority 1).
struct AnnForm {
  Formula f;
  Stack ann;

  AnnForm() = default;
  AnnForm(Formula ff, Stack a = {}) : f(std::move(ff)), ann(std::move(a)) {}
  bool operator==(const AnnForm& o) const { return f == o.f && ann == o.ann; }
  bool operator!=(const AnnForm& o) const { return !(*this == o); }
  bool operator<(const AnnForm& o) const {
    int c = Formula::cmp(f, o.f);
    if (c != 0) return c < 0;
    return ann < o.ann;
  }
  std::string str() const;
};

struct AnnSequent {
  Control ctl;
  std::set<AnnForm> forms;
  std::set<TraceAtom> traces;

  bool operator==(const AnnSequent& o) const {
    return ctl == o.ctl && forms == o.forms && traces == o.traces;
  }
  bool operator!=(const AnnSequent& o) const { return !(*this == o); }
  bool operator<(const AnnSequent& o) const;

  bool contains(const AnnForm& a) const { return forms.count(a) > 0; }
  bool contains(const TraceAtom& t) const { return traces.count(t) > 0; }
  bool has_formula(const Formula& f) const;
  std::vector<AnnForm> entries_of(const Formula& f) const;
  Sequent strip() const;
  // control covers all names used in annotations, without repetition
  void check_wellformed() const;
  std::string str() const;

  static AnnSequent of_pure(const Sequent& s);  // epsilon annotations
};

enum class JsRule {
  Ax1, Ax2, Ax3, Ax4, RAnd, ROr, FpMu, FpNu, RDia, Trans, Weak, Thin, Exp,
  JumpO, JumpE, Cut, TCut, Reset, Discharge,
  Token,  // repeat leaf
  Open    // open assumption leaf
};
std::string js_rule_name(JsRule r);
std::optional<JsRule> js_rule_of(const std::string& s);

struct JsRuleApp {
  JsRule rule = JsRule::Weak;
  std::optional<AnnForm> principal;   // RAnd/ROr/Fp/RDia; Ax1 first pivot
  std::optional<AnnForm> principal2;  // Ax1 second pivot
  bool keep_principal = true;
  std::optional<Name> name;           // FpMu/JumpE fresh name; Reset name
  std::optional<Formula> cut_formula; // Cut
  std::optional<TraceAtom> atom;      // Ax3/Ax4/TCut/Trans/JumpO/JumpE
  std::optional<TraceAtom> atom2;     // Trans second
  std::optional<AnnForm> jump_source; // JumpO/JumpE source entry
  std::optional<AnnForm> weak_form;   // Weak/Thin dropped entry
  std::optional<TraceAtom> weak_atom; // Weak (trace flavour)
  std::optional<AnnForm> exp_from;    // Exp: entry to shrink
  std::optional<Stack> exp_to;        // Exp: its new stack
  std::optional<Control> new_ctl;     // Exp: premiss control
  bool relevant_only = true;
};

std::vector<AnnSequent> apply_rule_js2(const AnnSequent& conclusion, const JsRuleApp& app,
                                       const Universe& u);

// Cyclic derivations: a finite tree; Token leaves point to Discharge-labelled
// proper ancestors carrying the same sequent.
struct JsProof {
  struct Node {
    AnnSequent seq;
    JsRuleApp app;
    std::string token;   // Discharge / Token
    int companion = -1;  // Token
    std::vector<int> children;
  };
  std::vector<Node> nodes;
  int root = 0;
  Universe universe;

  int add(AnnSequent s, JsRuleApp a) {
    nodes.push_back({std::move(s), std::move(a), "", -1, {}});
    return static_cast<int>(nodes.size()) - 1;
  }
  std::vector<int> parents() const;  // -1 for the root
};

// Least name (by seniority in the first control) that occurs in every
// control on the path and is reset along it; nullopt when none.
std::optional<Name> path_successful(const JsProof& p, const std::vector<int>& path);

struct JsCheckResult {
  bool valid = false;
  int node = -1;
  std::string reason;
};
JsCheckResult check_cyclic_proof(const JsProof& p, bool allow_open = false);

// Replace discharged leaves by copies of their companion's subtree, `depth`
// rounds. Remaining tokens whose companions were lost become open leaves.
JsProof unfold_prefix(const JsProof& p, int depth);

// Strongly connected subtree of a companion node (descendants only).
std::set<int> scs(const JsProof& p, int companion);
// Invariant proofs: each repeat's longest common control prefix equals the
// companion's control.
bool is_invariant(const JsProof& p);

// Regular infinite derivations presented as finite graphs.
struct JsGraph {
  struct Node {
    AnnSequent seq;
    JsRuleApp app;
    std::vector<int> children;  // may point anywhere: cycles allowed
  };
  std::vector<Node> nodes;
  int root = 0;
  Universe universe;
};

JsGraph cyclic_to_graph(const JsProof& p);
// Folds a regular graph whose infinite branches are all successful into a
// cyclic proof; with invariant_mode the repeats additionally satisfy the
// initial-segment condition. Throws ResourceError (naming the offending
// lasso) when the budget runs out.
JsProof fold_regular(const JsGraph& g, bool invariant_mode, int node_budget = 200000);

// The rule-driven image of a saturated regular NW2 proof: each rule is
// replaced by its annotated counterpart and productive jump/thin/Reset/exp'
// steps are inserted eagerly after every rule.
JsGraph translate_nw2_to_js2(const NwProof& p);

// Forget annotations and the annotation-management rules.
NwProof strip_js2_to_nw2(const JsProof& p);

// The eager annotation-management block, shared by the translation and the
// prover: jumps, thins, resets, control cleanup; optionally clears
// annotations of fixpoint-free formulas first (full exp steps).
struct EagerStep {
  JsRuleApp app;
  AnnSequent result;
};
std::vector<EagerStep> eager_chain(const AnnSequent& s, const Universe& u, bool clear_fixfree);

// ---------------------------------------------------------------------------
// Bounded prover

enum class ProveStatus { Proved, Refuted, Unknown };

struct ProveBudget {
  int nodes = 40000;
  int depth = 300;
  int max_cuts = 2;       // iterative deepening over cut applications
  int model_states = 3;   // refutation search bound
  SatBudget sat;
};

struct ProveResult {
  ProveStatus status = ProveStatus::Unknown;
  std::optional<JsProof> proof;
  std::optional<SatWitness> countermodel;
  std::string note;
};

ProveResult prove(const Sequent& gamma, const ProveBudget& budget = {},
                  const Universe* ambient = nullptr);

}  // namespace mu2

#endif
