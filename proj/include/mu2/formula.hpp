#ifndef MU2_FORMULA_HPP
#define MU2_FORMULA_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mu2 {

struct ParseError : std::runtime_error {
  size_t pos;
  ParseError(const std::string& msg, size_t p) : std::runtime_error(msg), pos(p) {}
};

struct RuleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A modal action: base identifier plus converse flag. The converse map is an
// involution with a != conv(a).
struct Action {
  std::string base;
  bool conv = false;

  Action() = default;
  Action(std::string b, bool c = false) : base(std::move(b)), conv(c) {}
  Action converse() const { return Action(base, !conv); }

  bool operator==(const Action& o) const { return base == o.base && conv == o.conv; }
  bool operator!=(const Action& o) const { return !(*this == o); }
  bool operator<(const Action& o) const {
    if (base != o.base) return base < o.base;
    return conv < o.conv;
  }
  std::string str() const { return conv ? base + "-" : base; }
};

enum class FKind : uint8_t {
  Bot, Top, Prop, NegProp, Var, BVar, Or, And, Dia, Box, Mu, Nu
};

// Immutable formula handle. Bound variables are de Bruijn indices, so
// alpha-equivalent formulas with equal binder marks compare equal; binder
// names are kept only as printing hints. The mark is an integer "dialect"
// tag on binders (concrete syntax: trailing primes) used to keep renamed
// copies of a formula distinct from the original.
class Formula {
 public:
  Formula() = default;

  FKind kind() const { return node_->kind; }
  bool valid() const { return node_ != nullptr; }

  const std::string& name() const { return node_->name; }  // Prop/NegProp/Var, binder hint
  uint32_t bindex() const { return node_->index; }         // BVar
  uint32_t mark() const { return node_->index; }           // Mu/Nu
  const Action& action() const { return node_->act; }      // Dia/Box
  Formula left() const { return Formula(node_->lhs); }
  Formula right() const { return Formula(node_->rhs); }
  Formula body() const { return Formula(node_->lhs); }     // Dia/Box/Mu/Nu

  size_t hash() const { return node_->hash; }
  size_t size() const { return node_->size; }

  bool operator==(const Formula& o) const;
  bool operator!=(const Formula& o) const { return !(*this == o); }
  bool operator<(const Formula& o) const { return cmp(*this, o) < 0; }

  bool is_fixpoint() const { return kind() == FKind::Mu || kind() == FKind::Nu; }
  bool has_fixpoint() const { return node_->has_fix; }
  bool is_sentence() const;
  bool is_literal() const {
    FKind k = kind();
    return k == FKind::Bot || k == FKind::Top || k == FKind::Prop || k == FKind::NegProp;
  }

  // Structural subformula test (on the locally-nameless tree).
  bool has_subformula(const Formula& sub) const;

  std::string str() const;

  static int cmp(const Formula& a, const Formula& b);

  // Rebuilds a binder over an already locally-closed body (de Bruijn indices
  // in place). Used by the structural transforms; prefer f_mu/f_nu.
  static Formula make_binder_node(FKind k, const std::string& hint, const Formula& body,
                                  uint32_t mark);

 private:
  struct Node {
    FKind kind;
    std::string name;
    uint32_t index = 0;
    Action act;
    std::shared_ptr<const Node> lhs, rhs;
    size_t hash = 0;
    size_t size = 1;
    bool has_fix = false;
  };
  std::shared_ptr<const Node> node_;

  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Formula make(Node n);

  friend Formula f_bot();
  friend Formula f_top();
  friend Formula f_prop(const std::string&);
  friend Formula f_negprop(const std::string&);
  friend Formula f_var(const std::string&);
  friend Formula f_bvar(uint32_t);
  friend Formula f_or(const Formula&, const Formula&);
  friend Formula f_and(const Formula&, const Formula&);
  friend Formula f_dia(const Action&, const Formula&);
  friend Formula f_box(const Action&, const Formula&);
  friend Formula f_mu(const std::string&, const Formula&, uint32_t mark);
  friend Formula f_nu(const std::string&, const Formula&, uint32_t mark);
  friend Formula unfold(const Formula&);
  friend Formula negate(const Formula&);
  friend Formula substitute(const Formula&, const std::string&, const Formula&, bool);
  friend Formula map_marks(const Formula&, int delta, uint32_t threshold);
  friend class Printer;
};

Formula f_bot();
Formula f_top();
Formula f_prop(const std::string& p);
Formula f_negprop(const std::string& p);
Formula f_var(const std::string& x);
Formula f_or(const Formula& a, const Formula& b);
Formula f_and(const Formula& a, const Formula& b);
Formula f_dia(const Action& a, const Formula& f);
Formula f_box(const Action& a, const Formula& f);
// Binds free occurrences of `x` in `body`.
Formula f_mu(const std::string& x, const Formula& body, uint32_t mark = 0);
Formula f_nu(const std::string& x, const Formula& body, uint32_t mark = 0);

// Negation per the dualizing table; an involution. Variables are self-dual.
Formula negate(const Formula& f);

// Unfolding of a fixpoint formula: body with the bound variable replaced by
// the formula itself.
Formula unfold(const Formula& fix);

// Replace the free variable `x` by `psi`. With `check_capture`, raises
// RuleError when a free variable of `psi` collides with the display name of a
// binder enclosing an occurrence of `x` (the named-syntax capture condition).
Formula substitute(const Formula& phi, const std::string& x, const Formula& psi,
                   bool check_capture = true);

std::set<std::string> free_vars(const Formula& f);

// Parsing. `sentence_mode` rejects free variables (identifiers starting with
// an uppercase letter not bound by an enclosing mu/nu).
Formula parse_formula(const std::string& text, bool sentence_mode = true);
std::string print_formula(const Formula& f);

// Vocabulary: propositions and actions; an action always comes paired with
// its converse.
struct Vocabulary {
  std::set<std::string> props;
  std::set<std::string> action_bases;  // each base stands for both a and a-
  bool operator==(const Vocabulary& o) const {
    return props == o.props && action_bases == o.action_bases;
  }
  bool subset_of(const Vocabulary& o) const;
  Vocabulary intersect(const Vocabulary& o) const;
};
Vocabulary vocabulary(const Formula& f);

// Trace atoms phi >k psi (positive) and phi !>k psi (negated).
struct TraceAtom {
  Formula source, target;
  int k = 1;
  bool positive = true;

  TraceAtom() = default;
  TraceAtom(Formula s, Formula t, int kk, bool pos = true)
      : source(std::move(s)), target(std::move(t)), k(kk), positive(pos) {}
  TraceAtom negated() const { return TraceAtom(source, target, k, !positive); }

  bool operator==(const TraceAtom& o) const {
    return k == o.k && positive == o.positive && source == o.source && target == o.target;
  }
  bool operator!=(const TraceAtom& o) const { return !(*this == o); }
  bool operator<(const TraceAtom& o) const;
  std::string str() const;
};

// A sequent: finite set of formulas plus a finite set of trace atoms, read
// conjunctively.
struct Sequent {
  std::set<Formula> formulas;
  std::set<TraceAtom> traces;

  Sequent() = default;
  explicit Sequent(std::set<Formula> fs, std::set<TraceAtom> ts = {})
      : formulas(std::move(fs)), traces(std::move(ts)) {}

  bool operator==(const Sequent& o) const {
    return formulas == o.formulas && traces == o.traces;
  }
  bool operator!=(const Sequent& o) const { return !(*this == o); }
  bool operator<(const Sequent& o) const;
  bool contains(const Formula& f) const { return formulas.count(f) > 0; }
  bool contains(const TraceAtom& t) const { return traces.count(t) > 0; }
  bool empty() const { return formulas.empty() && traces.empty(); }
  std::string str() const;
};
Sequent parse_sequent(const std::string& text);
Vocabulary vocabulary(const Sequent& s);

// Closure under direct boolean/modal subformulas and fixpoint unfolding.
std::set<Formula> closure(const std::set<Formula>& seed);
std::set<Formula> closure(const Formula& f);
// Clos(seed) together with Clos of the negations; closed under negation.
std::set<Formula> neg_closure(const std::set<Formula>& seed);

// A negation-closed formula universe with its priority function. Priorities
// are even exactly on mu-formulas, 1 on non-fixpoints, and monotone for the
// dependence order.
class Universe {
 public:
  Universe() = default;
  static Universe of(const std::set<Formula>& seed);
  static Universe of(const Sequent& s);

  bool contains(const Formula& f) const { return formulas_.count(f) > 0; }
  const std::set<Formula>& formulas() const { return formulas_; }
  int omega(const Formula& f) const;
  int max_even() const { return max_even_; }
  int max_priority() const { return max_prio_; }
  // Upper bound for trace-atom priorities: the maximal priority of the
  // universe, at least 1 so the boolean rules can emit their atoms.
  int k_max() const { return max_prio_ > 0 ? max_prio_ : 1; }

  // Extends the universe with the negation closure of `extra`, keeping all
  // existing priority assignments; new fixpoints get values above the old
  // ones.
  Universe extend(const std::set<Formula>& extra) const;
  // Restriction to a negation-closed subset (priorities kept).
  Universe restrict(const std::set<Formula>& subset) const;

  const std::map<Formula, int>& priority_map() const { return omega_; }
  static Universe from_priority_map(std::map<Formula, int> omega);
  // Checks closure under ->C and negation, the parity constraint and
  // monotonicity; throws RuleError on violation.
  void validate() const;

 private:
  std::set<Formula> formulas_;
  std::map<Formula, int> omega_;
  int max_even_ = 0;
  int max_prio_ = 1;
  int k_max_ = 0;
  void recompute_bounds();
};

// Deterministic priority assignment for a negation-closed set.
std::map<Formula, int> assign_priorities(const std::set<Formula>& phi);

// Relevance of a trace atom: target in Clos(source) and both endpoints
// contain fixpoints.
bool is_relevant(const TraceAtom& t);

// Renaming of the binder marks of one sequent away from another, so that the
// two sides share no fixpoint formulas in their closures.
struct MarkRenaming {
  uint32_t delta = 0;
  Formula apply(const Formula& f) const;
  Formula undo(const Formula& f) const;
  Sequent apply(const Sequent& s) const;
  Sequent undo(const Sequent& s) const;
};
std::pair<Sequent, MarkRenaming> alpha_rename_disjoint(const Sequent& gamma,
                                                       const Sequent& delta);

// Largest binder mark occurring in f (0 when none).
uint32_t max_mark(const Formula& f);

}  // namespace mu2

#endif
