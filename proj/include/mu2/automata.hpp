#ifndef MU2_AUTOMATA_HPP
#define MU2_AUTOMATA_HPP

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mu2/names.hpp"

namespace mu2 {

// Interface the Safra construction needs from a nondeterministic epsilon
// automaton; implemented by the explicit-alphabet automaton below and by the
// tracking automaton (whose alphabet is computed on demand).
struct EpsInterface {
  virtual ~EpsInterface() = default;
  virtual int num_states() const = 0;
  virtual int priority(int q) const = 0;
  // k-parity epsilon-closures: for each achievable exact maximum k the list
  // of reachable states; sorted by k.
  virtual const std::vector<std::pair<int, std::vector<int>>>& eps_closures(int q) const = 0;
  virtual int max_even() const = 0;
};

// Explicit epsilon parity automaton over a finite alphabet of letter names.
struct EpsAutomaton : EpsInterface {
  std::vector<std::string> state_names;
  std::vector<std::string> letters;
  std::vector<int> prio;                              // per state, >= 0
  std::vector<std::vector<std::vector<int>>> basic;   // [state][letter] -> targets
  std::vector<std::vector<int>> eps;                  // [state] -> targets
  int initial = 0;

  int add_state(const std::string& name, int priority);
  int add_letter(const std::string& z);
  void add_basic(int q, int letter, int r);
  void add_eps(int q, int r);
  int letter_index(const std::string& z) const;

  int num_states() const override { return static_cast<int>(state_names.size()); }
  int priority(int q) const override { return prio[q]; }
  const std::vector<std::pair<int, std::vector<int>>>& eps_closures(int q) const override;
  int max_even() const override;

 private:
  mutable std::vector<std::vector<std::pair<int, std::vector<int>>>> closures_;
  mutable bool closures_ready_ = false;
  void compute_closures() const;
};

// All states b reachable from a by a nonempty epsilon path whose maximum
// priority over the path (start excluded, end included) is exactly k.
std::vector<int> eps_closure_k(const EpsInterface& a, int state, int k);

// A Safra state: entries state -> stack (at most one per state once settled;
// transient multi-entries occur inside a step), control, green names of the
// last Reset. Equality includes the colouring.
struct SafraState {
  std::vector<std::pair<int, Stack>> entries;  // sorted by (state, stack)
  Control control;
  std::set<Name> green;

  bool operator==(const SafraState& o) const {
    return entries == o.entries && control == o.control && green == o.green;
  }
  bool operator<(const SafraState& o) const;
  std::string str(const std::vector<std::string>& state_names = {}) const;
  const Stack* stack_of(int q) const;
  void check_wellformed(const EpsInterface& a) const;  // throws on violation
};

SafraState safra_initial(const EpsInterface& a, int initial);

// One transition of the determinized automaton: basic move, cover, eps-move,
// thin, reset, in that order, with canonical name choices.
SafraState safra_step(const EpsInterface& a, const SafraState& s,
                      const std::function<std::vector<int>(int)>& delta_basic);

// Deterministic Rabin automaton over the reachable Safra states. Acceptance:
// some name active cofinitely often and green infinitely often.
struct RabinAutomaton {
  std::vector<std::string> letters;
  std::vector<SafraState> states;
  std::vector<std::vector<int>> delta;  // [state][letter]
  int initial = 0;
  std::vector<std::string> source_state_names;  // of the input automaton
};

RabinAutomaton determinize(const EpsAutomaton& a, int max_states = 200000);

// Does the nondeterministic automaton accept u v^omega? Product search for a
// reachable cycle with at least one basic transition and even maximum
// priority.
bool lasso_accepts_nondet(const EpsAutomaton& a, const std::vector<int>& u,
                          const std::vector<int>& v);
bool lasso_accepts_nondet(const EpsAutomaton& a, const std::vector<std::string>& u,
                          const std::vector<std::string>& v);

// Deterministic run of the Rabin automaton on the lasso; accepts iff some
// name is active on the whole cycle and green somewhere on it.
bool lasso_accepts_rabin(const RabinAutomaton& d, const std::vector<int>& u,
                         const std::vector<int>& v);
bool lasso_accepts_rabin(const RabinAutomaton& d, const std::vector<std::string>& u,
                         const std::vector<std::string>& v);

}  // namespace mu2

#endif
