#include "mu2/formula.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <functional>
#include <sstream>

namespace mu2 {

namespace {

size_t hash_mix(size_t h, size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

}  // namespace

Formula Formula::make(Node n) {
  size_t h = static_cast<size_t>(n.kind) * 0x100000001b3ULL;
  h = hash_mix(h, std::hash<std::string>{}(
                      (n.kind == FKind::Prop || n.kind == FKind::NegProp || n.kind == FKind::Var)
                          ? n.name
                          : std::string()));
  if (n.kind == FKind::BVar || n.kind == FKind::Mu || n.kind == FKind::Nu)
    h = hash_mix(h, n.index);
  if (n.kind == FKind::Dia || n.kind == FKind::Box) {
    h = hash_mix(h, std::hash<std::string>{}(n.act.base));
    h = hash_mix(h, n.act.conv ? 1 : 0);
  }
  n.size = 1;
  n.has_fix = (n.kind == FKind::Mu || n.kind == FKind::Nu);
  if (n.lhs) {
    h = hash_mix(h, n.lhs->hash);
    n.size += n.lhs->size;
    n.has_fix = n.has_fix || n.lhs->has_fix;
  }
  if (n.rhs) {
    h = hash_mix(h, n.rhs->hash);
    n.size += n.rhs->size;
    n.has_fix = n.has_fix || n.rhs->has_fix;
  }
  n.hash = h;
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula f_bot() { Formula::Node n; n.kind = FKind::Bot; return Formula::make(std::move(n)); }
Formula f_top() { Formula::Node n; n.kind = FKind::Top; return Formula::make(std::move(n)); }

Formula f_prop(const std::string& p) {
  Formula::Node n; n.kind = FKind::Prop; n.name = p; return Formula::make(std::move(n));
}
Formula f_negprop(const std::string& p) {
  Formula::Node n; n.kind = FKind::NegProp; n.name = p; return Formula::make(std::move(n));
}
Formula f_var(const std::string& x) {
  Formula::Node n; n.kind = FKind::Var; n.name = x; return Formula::make(std::move(n));
}
Formula f_bvar(uint32_t i) {
  Formula::Node n; n.kind = FKind::BVar; n.index = i; return Formula::make(std::move(n));
}
Formula f_or(const Formula& a, const Formula& b) {
  Formula::Node n; n.kind = FKind::Or; n.lhs = a.node_; n.rhs = b.node_;
  return Formula::make(std::move(n));
}
Formula f_and(const Formula& a, const Formula& b) {
  Formula::Node n; n.kind = FKind::And; n.lhs = a.node_; n.rhs = b.node_;
  return Formula::make(std::move(n));
}
Formula f_dia(const Action& a, const Formula& f) {
  Formula::Node n; n.kind = FKind::Dia; n.act = a; n.lhs = f.node_;
  return Formula::make(std::move(n));
}
Formula f_box(const Action& a, const Formula& f) {
  Formula::Node n; n.kind = FKind::Box; n.act = a; n.lhs = f.node_;
  return Formula::make(std::move(n));
}

static Formula make_binder(FKind k, const std::string& hint, const Formula& closed_body,
                           uint32_t mark);

// Replace free Var(x) by BVar(depth) while descending under binders.
static Formula abstract2(const Formula& f, const std::string& x, uint32_t depth) {
  switch (f.kind()) {
    case FKind::Var:
      return f.name() == x ? f_bvar(depth) : f;
    case FKind::Or:
      return f_or(abstract2(f.left(), x, depth), abstract2(f.right(), x, depth));
    case FKind::And:
      return f_and(abstract2(f.left(), x, depth), abstract2(f.right(), x, depth));
    case FKind::Dia:
      return f_dia(f.action(), abstract2(f.body(), x, depth));
    case FKind::Box:
      return f_box(f.action(), abstract2(f.body(), x, depth));
    case FKind::Mu:
      return make_binder(FKind::Mu, f.name(), abstract2(f.body(), x, depth + 1), f.mark());
    case FKind::Nu:
      return make_binder(FKind::Nu, f.name(), abstract2(f.body(), x, depth + 1), f.mark());
    default:
      return f;
  }
}

static Formula make_binder(FKind k, const std::string& hint, const Formula& closed_body,
                           uint32_t mark) {
  // closed_body already uses BVar indices for this binder at depth 0. The
  // stored hint carries no primes; marks are kept separately.
  std::string clean = hint;
  while (!clean.empty() && clean.back() == '\'') clean.pop_back();
  return Formula::make_binder_node(k, clean, closed_body, mark);
}

Formula Formula::make_binder_node(FKind k, const std::string& hint, const Formula& body,
                                  uint32_t mark) {
  Node n;
  n.kind = k;
  n.name = hint;
  n.index = mark;
  n.lhs = body.node_;
  return make(std::move(n));
}

Formula f_mu(const std::string& x, const Formula& body, uint32_t mark) {
  return make_binder(FKind::Mu, x, abstract2(body, x, 0), mark);
}
Formula f_nu(const std::string& x, const Formula& body, uint32_t mark) {
  return make_binder(FKind::Nu, x, abstract2(body, x, 0), mark);
}

int Formula::cmp(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return 0;
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  switch (a.kind()) {
    case FKind::Bot:
    case FKind::Top:
      return 0;
    case FKind::Prop:
    case FKind::NegProp:
    case FKind::Var:
      return a.name().compare(b.name());
    case FKind::BVar:
      return a.bindex() == b.bindex() ? 0 : (a.bindex() < b.bindex() ? -1 : 1);
    case FKind::Or:
    case FKind::And: {
      int c = cmp(a.left(), b.left());
      return c != 0 ? c : cmp(a.right(), b.right());
    }
    case FKind::Dia:
    case FKind::Box: {
      if (a.action() != b.action()) return a.action() < b.action() ? -1 : 1;
      return cmp(a.body(), b.body());
    }
    case FKind::Mu:
    case FKind::Nu: {
      if (a.mark() != b.mark()) return a.mark() < b.mark() ? -1 : 1;
      return cmp(a.body(), b.body());
    }
  }
  return 0;
}

bool Formula::operator==(const Formula& o) const {
  if (node_ == o.node_) return true;
  if (!node_ || !o.node_) return false;
  if (node_->hash != o.node_->hash) return false;
  return cmp(*this, o) == 0;
}

bool Formula::has_subformula(const Formula& sub) const {
  if (*this == sub) return true;
  if (node_->lhs && Formula(node_->lhs).has_subformula(sub)) return true;
  if (node_->rhs && Formula(node_->rhs).has_subformula(sub)) return true;
  return false;
}

namespace {

void free_vars_rec(const Formula& f, std::set<std::string>& out) {
  switch (f.kind()) {
    case FKind::Var: out.insert(f.name()); break;
    case FKind::Or:
    case FKind::And:
      free_vars_rec(f.left(), out);
      free_vars_rec(f.right(), out);
      break;
    case FKind::Dia:
    case FKind::Box:
    case FKind::Mu:
    case FKind::Nu:
      free_vars_rec(f.body(), out);
      break;
    default: break;
  }
}

bool locally_closed(const Formula& f, uint32_t depth) {
  switch (f.kind()) {
    case FKind::BVar: return f.bindex() < depth;
    case FKind::Or:
    case FKind::And:
      return locally_closed(f.left(), depth) && locally_closed(f.right(), depth);
    case FKind::Dia:
    case FKind::Box:
      return locally_closed(f.body(), depth);
    case FKind::Mu:
    case FKind::Nu:
      return locally_closed(f.body(), depth + 1);
    default: return true;
  }
}

// Replace BVar(depth) by repl.
Formula open_at(const Formula& f, const Formula& repl, uint32_t depth) {
  switch (f.kind()) {
    case FKind::BVar:
      return f.bindex() == depth ? repl : f;
    case FKind::Or:
      return f_or(open_at(f.left(), repl, depth), open_at(f.right(), repl, depth));
    case FKind::And:
      return f_and(open_at(f.left(), repl, depth), open_at(f.right(), repl, depth));
    case FKind::Dia:
      return f_dia(f.action(), open_at(f.body(), repl, depth));
    case FKind::Box:
      return f_box(f.action(), open_at(f.body(), repl, depth));
    case FKind::Mu:
      return make_binder(FKind::Mu, f.name(), open_at(f.body(), repl, depth + 1), f.mark());
    case FKind::Nu:
      return make_binder(FKind::Nu, f.name(), open_at(f.body(), repl, depth + 1), f.mark());
    default:
      return f;
  }
}

}  // namespace

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  free_vars_rec(f, out);
  return out;
}

bool Formula::is_sentence() const { return free_vars(*this).empty() && locally_closed(*this, 0); }

Formula unfold(const Formula& fix) {
  if (!fix.is_fixpoint()) throw RuleError("unfold: not a fixpoint formula: " + fix.str());
  return open_at(fix.body(), fix, 0);
}

Formula negate(const Formula& f) {
  switch (f.kind()) {
    case FKind::Bot: return f_top();
    case FKind::Top: return f_bot();
    case FKind::Prop: return f_negprop(f.name());
    case FKind::NegProp: return f_prop(f.name());
    case FKind::Var: return f;
    case FKind::BVar: return f;
    case FKind::Or: return f_and(negate(f.left()), negate(f.right()));
    case FKind::And: return f_or(negate(f.left()), negate(f.right()));
    case FKind::Dia: return f_box(f.action(), negate(f.body()));
    case FKind::Box: return f_dia(f.action(), negate(f.body()));
    case FKind::Mu: return make_binder(FKind::Nu, f.name(), negate(f.body()), f.mark());
    case FKind::Nu: return make_binder(FKind::Mu, f.name(), negate(f.body()), f.mark());
  }
  return f;
}

namespace {

void subst_check(const Formula& phi, const std::string& x, const std::set<std::string>& psi_free,
                 std::vector<std::string>& binders) {
  switch (phi.kind()) {
    case FKind::Var:
      if (phi.name() == x) {
        for (const auto& b : binders)
          if (psi_free.count(b))
            throw RuleError("substitute: variable " + b + " would be captured");
      }
      break;
    case FKind::Or:
    case FKind::And:
      subst_check(phi.left(), x, psi_free, binders);
      subst_check(phi.right(), x, psi_free, binders);
      break;
    case FKind::Dia:
    case FKind::Box:
      subst_check(phi.body(), x, psi_free, binders);
      break;
    case FKind::Mu:
    case FKind::Nu:
      binders.push_back(phi.name());
      subst_check(phi.body(), x, psi_free, binders);
      binders.pop_back();
      break;
    default: break;
  }
}

Formula subst_rec(const Formula& phi, const std::string& x, const Formula& psi) {
  switch (phi.kind()) {
    case FKind::Var:
      return phi.name() == x ? psi : phi;
    case FKind::Or:
      return f_or(subst_rec(phi.left(), x, psi), subst_rec(phi.right(), x, psi));
    case FKind::And:
      return f_and(subst_rec(phi.left(), x, psi), subst_rec(phi.right(), x, psi));
    case FKind::Dia:
      return f_dia(phi.action(), subst_rec(phi.body(), x, psi));
    case FKind::Box:
      return f_box(phi.action(), subst_rec(phi.body(), x, psi));
    case FKind::Mu:
      return make_binder(FKind::Mu, phi.name(), subst_rec(phi.body(), x, psi), phi.mark());
    case FKind::Nu:
      return make_binder(FKind::Nu, phi.name(), subst_rec(phi.body(), x, psi), phi.mark());
    default:
      return phi;
  }
}

}  // namespace

Formula substitute(const Formula& phi, const std::string& x, const Formula& psi,
                   bool check_capture) {
  if (check_capture) {
    auto pf = free_vars(psi);
    if (!pf.empty()) {
      std::vector<std::string> binders;
      subst_check(phi, x, pf, binders);
    }
  }
  return subst_rec(phi, x, psi);
}

Formula map_marks(const Formula& f, int delta, uint32_t threshold) {
  switch (f.kind()) {
    case FKind::Or:
      return f_or(map_marks(f.left(), delta, threshold), map_marks(f.right(), delta, threshold));
    case FKind::And:
      return f_and(map_marks(f.left(), delta, threshold), map_marks(f.right(), delta, threshold));
    case FKind::Dia:
      return f_dia(f.action(), map_marks(f.body(), delta, threshold));
    case FKind::Box:
      return f_box(f.action(), map_marks(f.body(), delta, threshold));
    case FKind::Mu:
    case FKind::Nu: {
      uint32_t m = f.mark();
      if (m >= threshold) m = static_cast<uint32_t>(static_cast<int64_t>(m) + delta);
      return make_binder(f.kind(), f.name(), map_marks(f.body(), delta, threshold), m);
    }
    default:
      return f;
  }
}

uint32_t max_mark(const Formula& f) {
  uint32_t m = 0;
  if (f.is_fixpoint()) m = f.mark();
  if (f.left().valid()) m = std::max(m, max_mark(f.left()));
  if (f.right().valid()) m = std::max(m, max_mark(f.right()));
  return m;
}

// ---------------------------------------------------------------------------
// Printing

class Printer {
 public:
  static std::string print(const Formula& f) {
    Printer p;
    collect_free(f, p.avoid_);
    std::string out;
    p.rec(f, 0, out);
    return out;
  }

 private:
  std::vector<std::string> env_;
  std::set<std::string> avoid_;

  static void collect_free(const Formula& f, std::set<std::string>& out) {
    if (f.kind() == FKind::Var) out.insert(f.name());
    if (f.left().valid()) collect_free(f.left(), out);
    if (f.right().valid()) collect_free(f.right(), out);
  }

  // precedence: 0 = binder scope, 1 = or, 2 = and, 3 = prefix/atom
  void rec(const Formula& f, int prec, std::string& out) {
    switch (f.kind()) {
      case FKind::Bot: out += "false"; return;
      case FKind::Top: out += "true"; return;
      case FKind::Prop: out += f.name(); return;
      case FKind::NegProp: out += "~" + f.name(); return;
      case FKind::Var: out += f.name(); return;
      case FKind::BVar: {
        size_t i = f.bindex();
        out += i < env_.size() ? env_[env_.size() - 1 - i] : ("?" + std::to_string(i));
        return;
      }
      case FKind::Or: {
        bool par = prec > 1;
        if (par) out += "(";
        rec(f.left(), 1, out);
        out += " | ";
        rec(f.right(), 2, out);
        if (par) out += ")";
        return;
      }
      case FKind::And: {
        bool par = prec > 2;
        if (par) out += "(";
        rec(f.left(), 2, out);
        out += " & ";
        rec(f.right(), 3, out);
        if (par) out += ")";
        return;
      }
      case FKind::Dia:
        out += "<" + f.action().str() + ">";
        rec(f.body(), 3, out);
        return;
      case FKind::Box:
        out += "[" + f.action().str() + "]";
        rec(f.body(), 3, out);
        return;
      case FKind::Mu:
      case FKind::Nu: {
        bool par = prec > 0;
        if (par) out += "(";
        std::string shown = fresh_shown(f);
        // the binder token drops the primes; they follow the name
        std::string base = shown.substr(0, shown.find('\''));
        out += (f.kind() == FKind::Mu ? "mu " : "nu ") + base +
               std::string(f.mark(), '\'') + ". ";
        env_.push_back(shown);
        rec(f.body(), 0, out);
        env_.pop_back();
        if (par) out += ")";
        return;
      }
    }
  }

  // Picks a display name (with the mark's primes) that collides neither with
  // free variables nor with enclosing binders.
  std::string fresh_shown(const Formula& binder) {
    std::string base = binder.name().empty() ? "X" : binder.name();
    std::string primes(binder.mark(), '\'');
    auto used = [&](const std::string& s) {
      if (avoid_.count(s)) return true;
      for (const auto& e : env_)
        if (e == s) return true;
      return false;
    };
    std::string cand = base + primes;
    int i = 0;
    while (used(cand)) cand = base + std::to_string(++i) + primes;
    return cand;
  }
};

std::string print_formula(const Formula& f) { return Printer::print(f); }
std::string Formula::str() const { return valid() ? print_formula(*this) : "<null>"; }

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Lexer {
  const std::string& s;
  size_t i = 0;

  explicit Lexer(const std::string& text) : s(text) {}

  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eof() {
    skip_ws();
    return i >= s.size();
  }
  char peek() {
    skip_ws();
    return i < s.size() ? s[i] : '\0';
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) { ++i; return true; }
    return false;
  }
  void expect(char c, const char* what) {
    if (!eat(c)) throw ParseError(std::string("expected '") + c + "' " + what, i);
  }
  bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  std::string ident() {
    skip_ws();
    if (i >= s.size() || !ident_start(s[i])) throw ParseError("expected identifier", i);
    size_t b = i;
    while (i < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
      ++i;
    return s.substr(b, i - b);
  }
  uint32_t primes() {
    uint32_t n = 0;
    while (i < s.size() && s[i] == '\'') { ++i; ++n; }
    return n;
  }
};

struct FParser {
  Lexer lx;
  bool sentence_mode;
  std::vector<std::pair<std::string, uint32_t>> bound;  // (name, mark)

  FParser(const std::string& text, bool sm) : lx(text), sentence_mode(sm) {}

  static bool is_var_name(const std::string& id) {
    return !id.empty() && std::isupper(static_cast<unsigned char>(id[0]));
  }

  Formula parse() {
    Formula f = expr();
    if (!lx.eof()) throw ParseError("trailing input", lx.i);
    return f;
  }

  Formula expr() { return parse_or(); }

  Formula parse_or() {
    Formula a = parse_and();
    while (lx.peek() == '|') {
      lx.eat('|');
      Formula b = parse_and();
      a = f_or(a, b);
    }
    return a;
  }

  Formula parse_and() {
    Formula a = parse_prefix();
    while (lx.peek() == '&') {
      lx.eat('&');
      Formula b = parse_prefix();
      a = f_and(a, b);
    }
    return a;
  }

  Action parse_action(char close) {
    std::string b = lx.ident();
    bool conv = lx.eat('-');
    lx.expect(close, "after action");
    return Action(b, conv);
  }

  Formula parse_prefix() {
    lx.skip_ws();
    char c = lx.peek();
    if (c == '~') {
      lx.eat('~');
      return negate(parse_prefix());
    }
    if (c == '<') {
      lx.eat('<');
      Action a = parse_action('>');
      return f_dia(a, parse_prefix());
    }
    if (c == '[') {
      lx.eat('[');
      Action a = parse_action(']');
      return f_box(a, parse_prefix());
    }
    if (c == '(') {
      lx.eat('(');
      Formula f = expr();
      lx.expect(')', "to close group");
      return f;
    }
    size_t at = lx.i;
    std::string id = lx.ident();
    if (id == "mu" || id == "nu") {
      std::string v = lx.ident();
      if (!is_var_name(v)) throw ParseError("binder variable must start uppercase: " + v, at);
      uint32_t mark = lx.primes();
      lx.expect('.', "after binder variable");
      std::string key = v + std::string(mark, '\'');
      bound.push_back({key, mark});
      Formula body = expr();  // binder scopes as far right as possible
      bound.pop_back();
      return id == "mu" ? f_mu(key, body, mark) : f_nu(key, body, mark);
    }
    if (id == "true") return f_top();
    if (id == "false") return f_bot();
    if (is_var_name(id)) {
      uint32_t mark = lx.primes();
      std::string key = id + std::string(mark, '\'');
      for (auto it = bound.rbegin(); it != bound.rend(); ++it)
        if (it->first == key) return f_var(key);
      if (sentence_mode)
        throw ParseError("unbound variable " + key, at);
      return f_var(key);
    }
    return f_prop(id);
  }
};

}  // namespace

Formula parse_formula(const std::string& text, bool sentence_mode) {
  FParser p(text, sentence_mode);
  return p.parse();
}

// ---------------------------------------------------------------------------
// Trace atoms and sequents

bool TraceAtom::operator<(const TraceAtom& o) const {
  if (k != o.k) return k < o.k;
  if (positive != o.positive) return positive < o.positive;
  int c = Formula::cmp(source, o.source);
  if (c != 0) return c < 0;
  return Formula::cmp(target, o.target) < 0;
}

std::string TraceAtom::str() const {
  return print_formula(source) + (positive ? " >" : " !>") + std::to_string(k) + " " +
         print_formula(target);
}

bool Sequent::operator<(const Sequent& o) const {
  if (formulas != o.formulas) return formulas < o.formulas;
  return traces < o.traces;
}

std::string Sequent::str() const {
  std::string out = "{ ";
  bool first = true;
  for (const auto& f : formulas) {
    if (!first) out += "; ";
    out += print_formula(f);
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
  out += " }";
  return out;
}

namespace {

// parses "phi >k psi" or "phi !>k psi"; formula text may not contain '>' or
// ';' at top level thanks to the grammar, so split lexically.
TraceAtom parse_trace_atom(const std::string& text) {
  // find " >" or " !>" followed by digits
  for (size_t i = 0; i + 1 < text.size(); ++i) {
    bool neg = false;
    size_t j = i;
    if (text[j] == '!' && j + 1 < text.size() && text[j + 1] == '>') { neg = true; ++j; }
    if (text[j] != '>') continue;
    size_t d = j + 1;
    size_t dstart = d;
    while (d < text.size() && std::isdigit(static_cast<unsigned char>(text[d]))) ++d;
    if (d == dstart) continue;
    // candidate split
    std::string lhs = text.substr(0, i);
    std::string rhs = text.substr(d);
    try {
      Formula a = parse_formula(lhs);
      Formula b = parse_formula(rhs);
      return TraceAtom(a, b, std::stoi(text.substr(dstart, d - dstart)), !neg);
    } catch (const ParseError&) {
      continue;  // '>' was inside a modality like <a>; keep scanning
    }
  }
  throw ParseError("not a trace atom: " + text, 0);
}

std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) { out.push_back(cur); cur.clear(); }
    else cur += c;
  }
  out.push_back(cur);
  return out;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

}  // namespace

Sequent parse_sequent(const std::string& text) {
  std::string body = text;
  size_t a = body.find_first_not_of(" \t\n");
  if (a != std::string::npos && body[a] == '{') {
    size_t b = body.find_last_of('}');
    if (b == std::string::npos) throw ParseError("unterminated sequent", body.size());
    body = body.substr(a + 1, b - a - 1);
  }
  Sequent s;
  // split formula part from trace part on the first top-level '|'? The
  // formula grammar uses '|' for disjunction, so the separator is " | "
  // with surrounding part counts; instead use the last '|' that yields a
  // parseable split, trying no-trace first.
  auto try_parse = [&](const std::string& fpart, const std::string& tpart) -> bool {
    Sequent tmp;
    for (const auto& piece : split_top(fpart, ';'))
      if (!blank(piece)) tmp.formulas.insert(parse_formula(piece));
    if (tpart.size()) {
      for (const auto& piece : split_top(tpart, ';'))
        if (!blank(piece)) tmp.traces.insert(parse_trace_atom(piece));
    }
    s = tmp;
    return true;
  };
  // candidates: split at each '|' position from the right
  std::vector<size_t> bars;
  for (size_t i = 0; i < body.size(); ++i)
    if (body[i] == '|') bars.push_back(i);
  try {
    if (try_parse(body, "")) return s;
  } catch (const ParseError&) {}
  for (auto it = bars.rbegin(); it != bars.rend(); ++it) {
    try {
      if (try_parse(body.substr(0, *it), body.substr(*it + 1))) return s;
    } catch (const ParseError&) { continue; }
  }
  throw ParseError("cannot parse sequent: " + text, 0);
}

// ---------------------------------------------------------------------------
// Vocabulary

namespace {
void vocab_rec(const Formula& f, Vocabulary& v) {
  switch (f.kind()) {
    case FKind::Prop:
    case FKind::NegProp:
      v.props.insert(f.name());
      break;
    case FKind::Dia:
    case FKind::Box:
      v.action_bases.insert(f.action().base);
      vocab_rec(f.body(), v);
      break;
    case FKind::Or:
    case FKind::And:
      vocab_rec(f.left(), v);
      vocab_rec(f.right(), v);
      break;
    case FKind::Mu:
    case FKind::Nu:
      vocab_rec(f.body(), v);
      break;
    default: break;
  }
}
}  // namespace

bool Vocabulary::subset_of(const Vocabulary& o) const {
  return std::includes(o.props.begin(), o.props.end(), props.begin(), props.end()) &&
         std::includes(o.action_bases.begin(), o.action_bases.end(), action_bases.begin(),
                       action_bases.end());
}

Vocabulary Vocabulary::intersect(const Vocabulary& o) const {
  Vocabulary r;
  std::set_intersection(props.begin(), props.end(), o.props.begin(), o.props.end(),
                        std::inserter(r.props, r.props.begin()));
  std::set_intersection(action_bases.begin(), action_bases.end(), o.action_bases.begin(),
                        o.action_bases.end(),
                        std::inserter(r.action_bases, r.action_bases.begin()));
  return r;
}

Vocabulary vocabulary(const Formula& f) {
  Vocabulary v;
  vocab_rec(f, v);
  return v;
}

Vocabulary vocabulary(const Sequent& s) {
  Vocabulary v;
  for (const auto& f : s.formulas) vocab_rec(f, v);
  for (const auto& t : s.traces) {
    vocab_rec(t.source, v);
    vocab_rec(t.target, v);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Closure and priorities

std::set<Formula> closure(const std::set<Formula>& seed) {
  std::set<Formula> out;
  std::vector<Formula> work(seed.begin(), seed.end());
  while (!work.empty()) {
    Formula f = work.back();
    work.pop_back();
    if (!out.insert(f).second) continue;
    switch (f.kind()) {
      case FKind::Or:
      case FKind::And:
        work.push_back(f.left());
        work.push_back(f.right());
        break;
      case FKind::Dia:
      case FKind::Box:
        work.push_back(f.body());
        break;
      case FKind::Mu:
      case FKind::Nu:
        work.push_back(unfold(f));
        break;
      default: break;
    }
  }
  return out;
}

std::set<Formula> closure(const Formula& f) { return closure(std::set<Formula>{f}); }

std::set<Formula> neg_closure(const std::set<Formula>& seed) {
  std::set<Formula> both = seed;
  for (const auto& f : seed) both.insert(negate(f));
  return closure(both);
}

std::map<Formula, int> assign_priorities(const std::set<Formula>& phi) {
  std::vector<Formula> fixes;
  for (const auto& f : phi)
    if (f.is_fixpoint()) fixes.push_back(f);
  // dependence order: a >= b iff Clos(a) == Clos(b) and a subformula of b.
  size_t n = fixes.size();
  std::vector<std::set<Formula>> clos(n);
  for (size_t i = 0; i < n; ++i) clos[i] = closure(fixes[i]);
  std::vector<std::vector<size_t>> above(n);  // above[i]: j with fixes[i] > fixes[j]
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (clos[i] == clos[j] && fixes[j].has_subformula(fixes[i])) above[i].push_back(j);
    }
  // rank = longest chain strictly below
  std::vector<int> rank(n, -1);
  std::function<int(size_t)> rk = [&](size_t i) -> int {
    if (rank[i] >= 0) return rank[i];
    rank[i] = 0;  // cycle guard; order is a strict partial order so no cycles
    int r = 0;
    for (size_t j : above[i]) r = std::max(r, rk(j) + 1);
    return rank[i] = r;
  };
  std::map<Formula, int> omega;
  for (size_t i = 0; i < n; ++i) {
    int r = rk(i);
    bool even = fixes[i].kind() == FKind::Mu;
    int v = 2 * r;
    if (even) v = std::max(v, 2);
    else v = (v % 2 == 1) ? v : v + 1;
    if (even && v % 2 == 1) ++v;
    omega[fixes[i]] = v;
  }
  for (const auto& f : phi)
    if (!f.is_fixpoint()) omega[f] = 1;
  return omega;
}

void Universe::recompute_bounds() {
  max_even_ = 0;
  max_prio_ = 1;
  for (const auto& [f, v] : omega_) {
    max_prio_ = std::max(max_prio_, v);
    if (v % 2 == 0) max_even_ = std::max(max_even_, v);
  }
  k_max_ = max_even_;
}

Universe Universe::of(const std::set<Formula>& seed) {
  for (const auto& f : seed)
    if (!f.is_sentence()) throw RuleError("universe seed must be sentences: " + f.str());
  Universe u;
  u.formulas_ = neg_closure(seed);
  u.omega_ = assign_priorities(u.formulas_);
  u.recompute_bounds();
  return u;
}

Universe Universe::of(const Sequent& s) {
  std::set<Formula> seed = s.formulas;
  for (const auto& t : s.traces) {
    seed.insert(t.source);
    seed.insert(t.target);
  }
  return of(seed);
}

int Universe::omega(const Formula& f) const {
  auto it = omega_.find(f);
  if (it != omega_.end()) return it->second;
  if (!f.is_fixpoint()) return 1;
  throw RuleError("priority requested for formula outside universe: " + f.str());
}

Universe Universe::extend(const std::set<Formula>& extra) const {
  std::set<Formula> add = neg_closure(extra);
  bool nothing_new = true;
  for (const auto& f : add)
    if (!formulas_.count(f)) { nothing_new = false; break; }
  if (nothing_new) return *this;
  Universe u = *this;
  for (const auto& f : add) u.formulas_.insert(f);
  // priorities for new fixpoints: assign within the added set, offset above
  // the existing range. New fixpoints never share a dependence class with an
  // old one (different closures), so only internal constraints matter.
  std::set<Formula> fresh;
  for (const auto& f : add)
    if (!omega_.count(f)) fresh.insert(f);
  auto local = assign_priorities(fresh);
  int base = max_prio_ + (max_prio_ % 2);  // even offset keeps parities
  for (const auto& [f, v] : local)
    u.omega_[f] = f.is_fixpoint() ? v + base : 1;
  u.recompute_bounds();
  return u;
}

Universe Universe::restrict(const std::set<Formula>& subset) const {
  Universe u;
  u.formulas_ = subset;
  for (const auto& f : subset) {
    auto it = omega_.find(f);
    if (it == omega_.end()) throw RuleError("restrict: formula not in universe");
    u.omega_[f] = it->second;
  }
  u.recompute_bounds();
  return u;
}

Universe Universe::from_priority_map(std::map<Formula, int> omega) {
  Universe u;
  for (const auto& [f, v] : omega) u.formulas_.insert(f);
  u.omega_ = std::move(omega);
  u.recompute_bounds();
  return u;
}

void Universe::validate() const {
  for (const auto& f : formulas_) {
    if (!formulas_.count(negate(f)))
      throw RuleError("universe not negation-closed at " + f.str());
    switch (f.kind()) {
      case FKind::Or:
      case FKind::And:
        if (!formulas_.count(f.left()) || !formulas_.count(f.right()))
          throw RuleError("universe not closed under subformulas at " + f.str());
        break;
      case FKind::Dia:
      case FKind::Box:
        if (!formulas_.count(f.body()))
          throw RuleError("universe not closed under subformulas at " + f.str());
        break;
      case FKind::Mu:
      case FKind::Nu:
        if (!formulas_.count(unfold(f)))
          throw RuleError("universe not closed under unfolding at " + f.str());
        break;
      default: break;
    }
    int v = omega(f);
    if (v < 1) throw RuleError("priority below 1 at " + f.str());
    if (f.kind() == FKind::Mu && v % 2 != 0)
      throw RuleError("mu-formula with odd priority: " + f.str());
    if (f.kind() == FKind::Nu && v % 2 == 0)
      throw RuleError("nu-formula with even priority: " + f.str());
    if (!f.is_fixpoint() && v != 1)
      throw RuleError("non-fixpoint with priority != 1: " + f.str());
  }
  // monotonicity on the dependence order
  std::vector<Formula> fixes;
  for (const auto& f : formulas_)
    if (f.is_fixpoint()) fixes.push_back(f);
  for (const auto& a : fixes)
    for (const auto& b : fixes) {
      if (a == b) continue;
      if (closure(a) == closure(b) && b.has_subformula(a) && omega(a) < omega(b))
        throw RuleError("priority not monotone: " + a.str() + " vs " + b.str());
    }
}

bool is_relevant(const TraceAtom& t) {
  if (!t.source.has_fixpoint() || !t.target.has_fixpoint()) return false;
  return closure(t.source).count(t.target) > 0;
}

Formula MarkRenaming::apply(const Formula& f) const { return map_marks(f, (int)delta, 0); }
Formula MarkRenaming::undo(const Formula& f) const { return map_marks(f, -(int)delta, delta); }

Sequent MarkRenaming::apply(const Sequent& s) const {
  Sequent out;
  for (const auto& f : s.formulas) out.formulas.insert(apply(f));
  for (const auto& t : s.traces)
    out.traces.insert(TraceAtom(apply(t.source), apply(t.target), t.k, t.positive));
  return out;
}

Sequent MarkRenaming::undo(const Sequent& s) const {
  Sequent out;
  for (const auto& f : s.formulas) out.formulas.insert(undo(f));
  for (const auto& t : s.traces)
    out.traces.insert(TraceAtom(undo(t.source), undo(t.target), t.k, t.positive));
  return out;
}

std::pair<Sequent, MarkRenaming> alpha_rename_disjoint(const Sequent& gamma,
                                                       const Sequent& delta) {
  uint32_t dmax = 0, gmax = 0;
  auto scan = [](const Sequent& s, uint32_t& m) {
    for (const auto& f : s.formulas) m = std::max(m, max_mark(f));
    for (const auto& t : s.traces) {
      m = std::max(m, max_mark(t.source));
      m = std::max(m, max_mark(t.target));
    }
  };
  scan(delta, dmax);
  scan(gamma, gmax);
  MarkRenaming r;
  bool has_binder = false;
  for (const auto& f : gamma.formulas)
    if (f.has_fixpoint()) has_binder = true;
  for (const auto& t : gamma.traces)
    if (t.source.has_fixpoint() || t.target.has_fixpoint()) has_binder = true;
  if (!has_binder) return {gamma, r};  // nothing to rename
  r.delta = std::max(dmax, gmax) + 1;
  return {r.apply(gamma), r};
}

}  // namespace mu2
