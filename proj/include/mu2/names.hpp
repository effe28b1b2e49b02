#ifndef MU2_NAMES_HPP
#define MU2_NAMES_HPP

#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace mu2 {

// A k-name: tier is an even priority, index distinguishes names within the
// tier. Printed "x<tier>.<index>".
struct Name {
  int tier = 0;
  int index = 0;

  Name() = default;
  Name(int t, int i) : tier(t), index(i) {}
  auto operator<=>(const Name&) const = default;
  std::string str() const;
  static std::optional<Name> parse(const std::string& s);
};

// A stack: a sequence of names with non-increasing tiers, non-repeating
// within each tier block.
using Stack = std::vector<Name>;

// crop(s, k): remove all names of tier < k (a prefix of the stack).
Stack crop(const Stack& s, int k);
bool stack_wellformed(const Stack& s);
std::string stack_str(const Stack& s);

// A control: non-repeating sequence of names recording seniority.
struct Control {
  std::vector<Name> names;

  bool contains(const Name& n) const;
  int position(const Name& n) const;  // -1 when absent
  void append(const Name& n);
  void remove(const Name& n);
  bool operator==(const Control& o) const { return names == o.names; }
  bool operator!=(const Control& o) const { return !(*this == o); }
  bool operator<(const Control& o) const { return names < o.names; }
  std::string str() const;

  // Lowest-index name of the given tier absent from this control.
  Name fresh(int tier) const;
};

// theta' is a subword of theta: all names occur and their order agrees.
bool is_subword(const Control& sub, const Control& of);
// theta is an initial segment of tau.
bool is_initial_segment(const Control& theta, const Control& tau);

enum class StackOrd { Less, Equal, Greater };

// The stack order <_theta: first the proper-extension clause (tier-wise),
// then lexicographically by the order the control assigns to names. Total on
// stacks whose names all occur in theta. Smaller means stronger.
StackOrd stack_order(const Control& theta, const Stack& a, const Stack& b);

}  // namespace mu2

#endif
