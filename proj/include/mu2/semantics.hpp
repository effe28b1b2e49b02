#ifndef MU2_SEMANTICS_HPP
#define MU2_SEMANTICS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mu2/formula.hpp"

namespace mu2 {

// Finite Kripke model. Edges are stored in forward orientation; converse
// actions are answered by reversing.
struct KripkeModel {
  std::vector<std::string> states;
  std::map<std::string, std::vector<std::vector<int>>> succ;  // base action -> succ[s]
  std::map<std::string, std::vector<std::vector<int>>> pred;  // base action -> pred[s]
  std::map<std::string, std::set<int>> val;                   // proposition -> states

  int n_states() const { return static_cast<int>(states.size()); }
  int state_index(const std::string& name) const;
  void add_state(const std::string& name);
  void add_edge(int s, const std::string& base, int t);
  void set_prop(const std::string& p, int s, bool on = true);
  bool has_prop(const std::string& p, int s) const;
  // successors under an action (converse answered via pred)
  const std::vector<int>& moves(const Action& a, int s) const;
  std::string str() const;
};

enum class Player { Exists, Forall };
inline Player opponent(Player p) { return p == Player::Exists ? Player::Forall : Player::Exists; }

// Finite parity game; infinite plays are won by Exists iff the maximum
// priority seen infinitely often is even. A player stuck at its own position
// loses.
struct ParityGame {
  std::vector<Player> owner;
  std::vector<int> priority;
  std::vector<std::vector<int>> moves;

  int size() const { return static_cast<int>(owner.size()); }
  int add_position(Player o, int prio) {
    owner.push_back(o);
    priority.push_back(prio);
    moves.emplace_back();
    return size() - 1;
  }
};

// Positional strategy: chosen successor for owned positions that have moves.
using PositionalStrategy = std::map<int, int>;

struct GameSolution {
  std::vector<Player> winner;            // per position
  PositionalStrategy strategy_exists;
  PositionalStrategy strategy_forall;
  std::vector<int> region(Player p) const {
    std::vector<int> out;
    for (int i = 0; i < (int)winner.size(); ++i)
      if (winner[i] == p) out.push_back(i);
    return out;
  }
};

// Zielonka's recursive algorithm with strategy extraction.
GameSolution solve_parity_game(const ParityGame& g);

// Audits a claimed winning region+strategy for `p`: every play following the
// strategy from a region position ends opponent-stuck or loops with
// p-favourable maximal priority. Returns true when the audit passes.
bool audit_strategy(const ParityGame& g, Player p, const std::vector<int>& region,
                    const PositionalStrategy& strat);

// The evaluation game of a formula universe on a model. Positions are
// (formula, state) pairs; priorities in the underlying parity game are the
// formula priorities shifted by one so that the solver's parity convention
// matches the trace convention (mu even, bad for Exists).
struct EvalGame {
  ParityGame game;
  std::vector<std::pair<Formula, int>> label;       // position -> (formula, state)
  std::map<std::pair<Formula, int>, int> position;  // inverse
  const Universe* universe = nullptr;
  const KripkeModel* model = nullptr;

  int pos(const Formula& f, int s) const;
  int raw_priority(int position) const;  // the formula's Omega
};

EvalGame build_eval_game(const Universe& u, const KripkeModel& m);

// Game-semantics model checking: true iff (phi, s) is won by Exists.
bool model_check(const KripkeModel& m, int s, const Formula& phi);

// Algebraic (Knaster-Tarski) semantics; the independent cross-check.
bool model_check_algebraic(const KripkeModel& m, int s, const Formula& phi);
std::set<int> eval_algebraic(const KripkeModel& m, const Formula& phi);

// Does the positive trace atom hold at s under the Exists strategy f?
// There must be a nonempty f-guided match from (source, s) back to
// (target, s) whose maximum priority over all but the final position is
// exactly t.k.
bool trace_atom_holds(const EvalGame& eg, int s, const PositionalStrategy& f,
                      const TraceAtom& t);

struct SatWitness {
  KripkeModel model;
  int state = 0;
  PositionalStrategy strategy;  // Exists strategy on the evaluation game
};

struct SatResult {
  std::optional<SatWitness> witness;
  bool exhaustive = true;  // false when a budget cap bound the search
  bool found() const { return witness.has_value(); }
};

struct SatBudget {
  int max_models = 400000;      // candidate models actually checked
  int max_strategies = 20000;   // per-model strategy enumeration cap
};

// Bounded satisfiability: enumerates pointed models up to maxStates states
// over the sequent's vocabulary, with a symmetry reduction (permutations
// fixing the root), and checks satisfaction. For sequents with trace atoms,
// positional Exists strategies are enumerated per model. Never reports
// "unsatisfiable": a miss is only NoneFound-within-bound.
SatResult sequent_satisfiable_bounded(const Sequent& gamma, int max_states,
                                      const SatBudget& budget = {});

// Satisfaction of a full sequent at a state (single strategy for everything).
bool sequent_holds(const Sequent& gamma, const KripkeModel& m, int s,
                   const SatBudget& budget = {});

}  // namespace mu2

#endif
