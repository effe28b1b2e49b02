#ifndef MU2_NW2_HPP
#define MU2_NW2_HPP

#include <optional>
#include <string>
#include <vector>

#include "mu2/automata.hpp"
#include "mu2/formula.hpp"

namespace mu2 {

enum class NwRule {
  Ax1, Ax2, Ax3, Ax4, RAnd, ROr, FpMu, FpNu, RDia, Trans, Weak, Cut, TCut,
  Rep  // repeat leaf with a back edge
};
std::string nw_rule_name(NwRule r);
std::optional<NwRule> nw_rule_of(const std::string& s);

// Parameters of one rule application; which fields matter depends on the
// rule. Premisses are recomputed from these, never stored.
struct NwRuleApp {
  NwRule rule = NwRule::Weak;
  std::optional<Formula> principal;       // RAnd/ROr/FpMu/FpNu/RDia; Ax1 pivot
  bool keep_principal = true;             // cumulative variant
  std::optional<Formula> cut_formula;     // Cut
  std::optional<TraceAtom> atom;          // Ax3/Ax4/TCut; Trans first
  std::optional<TraceAtom> atom2;         // Trans second
  std::optional<Formula> weak_formula;    // Weak (formula flavour)
  std::optional<TraceAtom> weak_atom;     // Weak (trace flavour)
  bool relevant_only = true;              // RDia/TCut trace restriction
};

// Negation closure of a sequent (formulas plus trace-atom endpoints).
std::set<Formula> seq_closure(const Sequent& s);

// Premiss of the modal rule for the given principal diamond, with the
// maximal box decomposition.
Sequent modal_premiss(const Sequent& psi, const Formula& principal, bool relevant_only = true);

// Validates the application against the rule table and returns its
// premisses; throws RuleError naming the violated side condition.
std::vector<Sequent> apply_rule_nw2(const Sequent& conclusion, const NwRuleApp& app,
                                    const Universe& u);

// The upward trail relation of a (conclusion, principal, premiss) letter.
struct Trail {
  Formula source, target;
  int weight = 1;
  bool operator<(const Trail& o) const;
  bool operator==(const Trail& o) const {
    return weight == o.weight && source == o.source && target == o.target;
  }
};
std::vector<Trail> upward_trail_relation(const Sequent& conc,
                                         const std::optional<Formula>& principal,
                                         const Sequent& prem, const Universe& u);

// A rule instance as a value (for the proof search game surface).
struct NwInstance {
  Sequent conclusion;
  NwRuleApp app;
  std::vector<Sequent> premisses;
};

// All instances with the given conclusion, in the prover's preference order:
// axioms; cumulative-productive or/and/fixpoint/trans; cumulative-productive
// cuts (relevant trace atoms only); modal rules; weakenings.
std::vector<NwInstance> enumerate_rule_instances(const Sequent& gamma, const Universe& u);

// A regular derivation: finite tree plus back edges from repeat leaves to
// ancestors carrying the same sequent.
struct NwProof {
  struct Node {
    Sequent seq;
    NwRuleApp app;
    std::vector<int> children;
    int backedge = -1;  // Rep only
  };
  std::vector<Node> nodes;
  int root = 0;
  Universe universe;

  int add(Sequent s, NwRuleApp a) {
    nodes.push_back({std::move(s), std::move(a), {}, -1});
    return static_cast<int>(nodes.size()) - 1;
  }
};

// Structural + local rule validity; global validity is checked by
// check_nw2_regular_proof below.
void check_nw2_local(const NwProof& p);

// Saturation: trans applied whenever applicable, fixpoint rules cumulative.
// The root sequent is unchanged.
NwProof saturate(const NwProof& p, int node_budget = 200000);
bool is_saturated(const NwProof& p);

// The tracking automaton over a universe: follows trails along branches.
// Letters are (conclusion, principal, premiss) triples.
struct RuleTriple {
  Sequent conc;
  std::optional<Formula> principal;
  Sequent prem;
};

class TrackingAutomaton : public EpsInterface {
 public:
  explicit TrackingAutomaton(const Universe& u);

  int num_states() const override { return total_; }
  int priority(int q) const override;
  const std::vector<std::pair<int, std::vector<int>>>& eps_closures(int q) const override;
  int max_even() const override { return max_even_; }

  int init_state() const { return 0; }
  int formula_state(const Formula& f) const;
  int star_state(const Formula& fix) const;
  int atom_state(const TraceAtom& t) const;
  std::string state_name(int q) const;
  const Universe& universe() const { return *u_; }

  std::vector<int> delta_basic(int q, const RuleTriple& z) const;

 private:
  const Universe* u_;
  std::vector<Formula> formulas_;
  std::map<Formula, int> fidx_;
  std::vector<Formula> stars_;
  std::map<Formula, int> xidx_;
  std::vector<TraceAtom> atoms_;
  std::map<TraceAtom, int> aidx_;
  int total_ = 0;
  int max_even_ = 0;
  std::vector<int> prio_;
  std::vector<std::vector<std::pair<int, std::vector<int>>>> closures_;
};

TrackingAutomaton build_tracking_automaton(const Universe& u);

struct NwCheckBudget {
  int fold_nodes = 200000;
  int lasso_cap = 400;     // simple cycles examined by the audit
  int lasso_len = 40;
};

struct NwCheckResult {
  bool valid = false;
  std::string reason;  // on failure
};

// Local validity, then the authoritative global check (translate to the
// annotated system and fold), then a bounded lasso audit against the
// tracking automaton. Implemented with the annotated-system machinery.
NwCheckResult check_nw2_regular_proof(const NwProof& p, const NwCheckBudget& budget = {});

// The bounded lasso audit alone: every simple-cycle branch word must be
// accepted by the tracking automaton.
NwCheckResult nw2_lasso_audit(const NwProof& p, const NwCheckBudget& budget = {});

}  // namespace mu2

#endif
