#include "mu2/names.hpp"

#include <algorithm>
#include <stdexcept>

namespace mu2 {

std::string Name::str() const {
  return "x" + std::to_string(tier) + "." + std::to_string(index);
}

std::optional<Name> Name::parse(const std::string& s) {
  if (s.size() < 4 || s[0] != 'x') return std::nullopt;
  size_t dot = s.find('.');
  if (dot == std::string::npos) return std::nullopt;
  try {
    int t = std::stoi(s.substr(1, dot - 1));
    int i = std::stoi(s.substr(dot + 1));
    return Name(t, i);
  } catch (...) {
    return std::nullopt;
  }
}

Stack crop(const Stack& s, int k) {
  Stack out;
  for (const auto& n : s) {
    if (n.tier < k) break;  // tiers are non-increasing
    out.push_back(n);
  }
  return out;
}

bool stack_wellformed(const Stack& s) {
  for (size_t i = 1; i < s.size(); ++i)
    if (s[i].tier > s[i - 1].tier) return false;
  for (size_t i = 0; i < s.size(); ++i)
    for (size_t j = i + 1; j < s.size(); ++j)
      if (s[i] == s[j]) return false;
  return true;
}

std::string stack_str(const Stack& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += " ";
    out += s[i].str();
  }
  return out + "]";
}

bool Control::contains(const Name& n) const { return position(n) >= 0; }

int Control::position(const Name& n) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == n) return static_cast<int>(i);
  return -1;
}

void Control::append(const Name& n) {
  if (contains(n)) throw std::logic_error("control already contains " + n.str());
  names.push_back(n);
}

void Control::remove(const Name& n) {
  names.erase(std::remove(names.begin(), names.end(), n), names.end());
}

std::string Control::str() const {
  std::string out;
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) out += " ";
    out += names[i].str();
  }
  return out;
}

Name Control::fresh(int tier) const {
  for (int i = 0;; ++i) {
    Name n(tier, i);
    if (!contains(n)) return n;
  }
}

bool is_subword(const Control& sub, const Control& of) {
  int last = -1;
  for (const auto& n : sub.names) {
    int p = of.position(n);
    if (p < 0 || p < last) return false;
    if (p == last) return false;
    last = p;
  }
  // order must agree pairwise; since positions are strictly increasing along
  // sub, this is already established.
  return true;
}

bool is_initial_segment(const Control& theta, const Control& tau) {
  if (theta.names.size() > tau.names.size()) return false;
  return std::equal(theta.names.begin(), theta.names.end(), tau.names.begin());
}

StackOrd stack_order(const Control& theta, const Stack& a, const Stack& b) {
  if (a == b) return StackOrd::Equal;
  for (const auto& n : a)
    if (!theta.contains(n)) throw std::logic_error("stack_order: name outside control");
  for (const auto& n : b)
    if (!theta.contains(n)) throw std::logic_error("stack_order: name outside control");
  // proper-extension clause, any crop level (even tiers suffice: crops only
  // change at tier boundaries)
  auto proper_ext = [](const Stack& x, const Stack& y, int k) {
    Stack xk = crop(x, k), yk = crop(y, k);
    return yk.size() < xk.size() && std::equal(yk.begin(), yk.end(), xk.begin());
  };
  int top = 0;
  for (const auto& n : a) top = std::max(top, n.tier);
  for (const auto& n : b) top = std::max(top, n.tier);
  for (int k = 0; k <= top + 1; ++k) {
    if (proper_ext(a, b, k)) return StackOrd::Less;
    if (proper_ext(b, a, k)) return StackOrd::Greater;
  }
  // lexicographic by control order
  size_t m = std::min(a.size(), b.size());
  for (size_t i = 0; i < m; ++i) {
    if (a[i] == b[i]) continue;
    return theta.position(a[i]) < theta.position(b[i]) ? StackOrd::Less : StackOrd::Greater;
  }
  // one is a proper prefix of the other: covered by the extension clause
  throw std::logic_error("stack_order: unreachable");
}

}  // namespace mu2
