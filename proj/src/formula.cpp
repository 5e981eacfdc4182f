#include "lossprobe/formula.hpp"

#include <algorithm>
#include <cctype>

namespace lossprobe {

FormulaError::FormulaError(std::size_t column, const std::string& what)
    : std::runtime_error("column " + std::to_string(column) + ": " + what), column_(column) {}

Formula Formula::constant(bool value) {
  Formula f;
  f.value_ = value;
  return f;
}

Formula Formula::prop(std::string id) {
  Formula f;
  f.kind_ = Kind::proposition;
  f.id_ = std::move(id);
  return f;
}

Formula Formula::negation(Formula operand) {
  Formula f;
  f.kind_ = Kind::negation;
  f.operands_.push_back(std::move(operand));
  return f;
}

namespace {

Formula binary(Formula::Kind kind, Formula a, Formula b) {
  switch (kind) {
    case Formula::Kind::conjunction: return Formula::conjunction(std::move(a), std::move(b));
    case Formula::Kind::disjunction: return Formula::disjunction(std::move(a), std::move(b));
    case Formula::Kind::implication: return Formula::implication(std::move(a), std::move(b));
    default: return Formula::biconditional(std::move(a), std::move(b));
  }
}

}  // namespace

#define LOSSPROBE_BINARY_FACTORY(name, k)    \
  Formula Formula::name(Formula a, Formula b) { \
    Formula f;                                  \
    f.kind_ = Kind::k;                          \
    f.operands_.push_back(std::move(a));        \
    f.operands_.push_back(std::move(b));        \
    return f;                                   \
  }

LOSSPROBE_BINARY_FACTORY(conjunction, conjunction)
LOSSPROBE_BINARY_FACTORY(disjunction, disjunction)
LOSSPROBE_BINARY_FACTORY(implication, implication)
LOSSPROBE_BINARY_FACTORY(biconditional, biconditional)

#undef LOSSPROBE_BINARY_FACTORY

bool Formula::evaluate(const std::map<std::string, bool, std::less<>>& assignment) const {
  switch (kind_) {
    case Kind::constant: return value_;
    case Kind::proposition: {
      auto it = assignment.find(id_);
      if (it == assignment.end()) throw FormulaError(0, "no value for proposition " + id_);
      return it->second;
    }
    case Kind::negation: return !lhs().evaluate(assignment);
    case Kind::conjunction: return lhs().evaluate(assignment) && rhs().evaluate(assignment);
    case Kind::disjunction: return lhs().evaluate(assignment) || rhs().evaluate(assignment);
    case Kind::implication: return !lhs().evaluate(assignment) || rhs().evaluate(assignment);
    case Kind::biconditional: return lhs().evaluate(assignment) == rhs().evaluate(assignment);
  }
  return false;
}

std::vector<std::string> Formula::propositions() const {
  std::vector<std::string> out;
  auto walk = [&](const Formula& f, auto&& self) -> void {
    if (f.kind_ == Kind::proposition) {
      if (std::find(out.begin(), out.end(), f.id_) == out.end()) out.push_back(f.id_);
    }
    for (const auto& op : f.operands_) self(op, self);
  };
  walk(*this, walk);
  return out;
}

int Formula::biconditional_depth() const noexcept {
  int deepest = 0;
  for (const auto& op : operands_) deepest = std::max(deepest, op.biconditional_depth());
  return deepest + (kind_ == Kind::biconditional ? 1 : 0);
}

// Parsing. Precedence, loosest first: <-> (left), -> (right), | (left), & (left), !.

namespace {

class FormulaParser {
public:
  explicit FormulaParser(std::string_view text) : text_(text) {}

  Formula run() {
    auto f = biconditional();
    skip();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

private:
  Formula biconditional() {
    auto f = implication();
    while (accept("<->")) f = binary(Formula::Kind::biconditional, std::move(f), implication());
    return f;
  }

  Formula implication() {
    auto f = disjunction();
    if (accept("->")) return binary(Formula::Kind::implication, std::move(f), implication());
    return f;
  }

  Formula disjunction() {
    auto f = conjunction();
    while (accept("|")) f = binary(Formula::Kind::disjunction, std::move(f), conjunction());
    return f;
  }

  Formula conjunction() {
    auto f = unary();
    while (accept("&")) f = binary(Formula::Kind::conjunction, std::move(f), unary());
    return f;
  }

  Formula unary() {
    if (accept("!")) return Formula::negation(unary());
    if (accept("(")) {
      auto f = biconditional();
      if (!accept(")")) fail("expected ')'");
      return f;
    }
    skip();
    const auto start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    if (start == pos_) fail(pos_ < text_.size() ? "unexpected '" + std::string(1, text_[pos_]) + "'" : "unexpected end of formula");
    if (!std::isalpha(static_cast<unsigned char>(text_[start]))) {
      pos_ = start;
      fail("proposition names start with a letter");
    }
    const auto word = text_.substr(start, pos_ - start);
    if (word == "true") return Formula::constant(true);
    if (word == "false") return Formula::constant(false);
    return Formula::prop(std::string(word));
  }

  bool accept(std::string_view token) {
    skip();
    if (text_.substr(pos_, token.size()) != token) return false;
    pos_ += token.size();
    return true;
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) { throw FormulaError(pos_ + 1, what); }

  std::string_view text_;
  std::size_t pos_ = 0;
};

int precedence(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::biconditional: return 1;
    case Formula::Kind::implication: return 2;
    case Formula::Kind::disjunction: return 3;
    case Formula::Kind::conjunction: return 4;
    default: return 5;
  }
}

std::string_view symbol(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::biconditional: return " <-> ";
    case Formula::Kind::implication: return " -> ";
    case Formula::Kind::disjunction: return " | ";
    default: return " & ";
  }
}

}  // namespace

Formula parse_formula(std::string_view text) { return FormulaParser(text).run(); }

std::string to_string(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::constant: return f.value() ? "true" : "false";
    case K::proposition: return f.id();
    case K::negation: {
      const auto inner = to_string(f.lhs());
      return precedence(f.lhs().kind()) < 5 ? "!(" + inner + ")" : "!" + inner;
    }
    default: break;
  }
  const int p = precedence(f.kind());
  const bool right_assoc = f.kind() == K::implication;
  auto side = [&](const Formula& child, bool is_left) {
    const int cp = precedence(child.kind());
    const bool wrap = cp < p || (cp == p && (right_assoc ? is_left : !is_left));
    const auto s = to_string(child);
    return wrap ? "(" + s + ")" : s;
  };
  return side(f.lhs(), true) + std::string(symbol(f.kind())) + side(f.rhs(), false);
}

namespace {

std::map<std::string, bool, std::less<>> assignment_for(const std::vector<std::string>& props, std::uint64_t bits) {
  std::map<std::string, bool, std::less<>> a;
  for (std::size_t i = 0; i < props.size(); ++i) a[props[i]] = (bits >> i) & 1U;
  return a;
}

}  // namespace

bool entails_classically(const Formula& premise, const Formula& conclusion) {
  auto props = premise.propositions();
  for (auto& p : conclusion.propositions()) {
    if (std::find(props.begin(), props.end(), p) == props.end()) props.push_back(p);
  }
  if (props.size() > 20) throw FormulaError(0, "too many propositions for a truth-table check");
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << props.size()); ++bits) {
    const auto a = assignment_for(props, bits);
    if (premise.evaluate(a) && !conclusion.evaluate(a)) return false;
  }
  return true;
}

bool equivalent_classically(const Formula& a, const Formula& b) {
  return entails_classically(a, b) && entails_classically(b, a);
}

// CNF

namespace {

using Cnf = std::vector<std::vector<PropLiteral>>;

void add_clause(Cnf& cnf, std::vector<PropLiteral> clause) {
  for (std::size_t i = 0; i < clause.size(); ++i) {
    for (std::size_t j = i + 1; j < clause.size(); ++j) {
      if (clause[i].id == clause[j].id && clause[i].negated != clause[j].negated) return;  // tautology
    }
  }
  if (std::find(cnf.begin(), cnf.end(), clause) == cnf.end()) cnf.push_back(std::move(clause));
}

Cnf conjoin(Cnf a, const Cnf& b) {
  for (const auto& c : b) add_clause(a, c);
  return a;
}

Cnf distribute(const Cnf& a, const Cnf& b) {
  Cnf out;
  for (const auto& x : a) {
    for (const auto& y : b) {
      auto merged = x;
      for (const auto& l : y) {
        if (std::find(merged.begin(), merged.end(), l) == merged.end()) merged.push_back(l);
      }
      add_clause(out, std::move(merged));
    }
  }
  return out;
}

// CNF of f (positive) or of !f (negative).
Cnf cnf(const Formula& f, bool positive) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::constant:
      return f.value() == positive ? Cnf{} : Cnf{{}};
    case K::proposition:
      return Cnf{{PropLiteral{f.id(), !positive}}};
    case K::negation:
      return cnf(f.lhs(), !positive);
    case K::conjunction:
      return positive ? conjoin(cnf(f.lhs(), true), cnf(f.rhs(), true))
                      : distribute(cnf(f.lhs(), false), cnf(f.rhs(), false));
    case K::disjunction:
      return positive ? distribute(cnf(f.lhs(), true), cnf(f.rhs(), true))
                      : conjoin(cnf(f.lhs(), false), cnf(f.rhs(), false));
    case K::implication:
      return positive ? distribute(cnf(f.lhs(), false), cnf(f.rhs(), true))
                      : conjoin(cnf(f.lhs(), true), cnf(f.rhs(), false));
    case K::biconditional:
      if (positive) {
        return conjoin(distribute(cnf(f.lhs(), false), cnf(f.rhs(), true)),
                       distribute(cnf(f.lhs(), true), cnf(f.rhs(), false)));
      }
      return conjoin(distribute(cnf(f.lhs(), true), cnf(f.rhs(), true)),
                     distribute(cnf(f.lhs(), false), cnf(f.rhs(), false)));
  }
  return {};
}

}  // namespace

std::vector<std::vector<PropLiteral>> to_cnf(const Formula& f) { return cnf(f, true); }

std::string atom_name(std::string_view proposition_id) {
  std::string out(proposition_id);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<elp::Clause> formula_to_clauses(const Formula& f, Polarity polarity, elp::Program& symbols) {
  if (f.biconditional_depth() > kMaxBiconditionalDepth) {
    throw FormulaError(0, "biconditionals nested deeper than " + std::to_string(kMaxBiconditionalDepth) +
                              " are not supported: " + to_string(f));
  }
  auto lit = [&](const PropLiteral& l) { return symbols.literal(atom_name(l.id), l.negated); };
  const auto clauses = to_cnf(f);
  std::vector<elp::Clause> out;

  if (polarity == Polarity::violate) {
    // !f == OR over CNF clauses of (AND of complemented literals).
    const auto violation = symbols.literal(kViolationAtom);
    for (const auto& c : clauses) {
      elp::Clause rule{violation, {}, {}};
      for (const auto& l : c) rule.positive_body.push_back(lit(l).complement());
      out.push_back(std::move(rule));
    }
    return out;
  }

  for (const auto& c : clauses) {
    if (c.empty()) {
      const auto falsum = symbols.literal(kFalsumAtom);
      out.push_back({falsum, {}, {}});
      out.push_back({falsum.complement(), {}, {}});
      continue;
    }
    for (std::size_t h = c.size(); h-- > 0;) {
      elp::Clause rule{lit(c[h]), {}, {}};
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (i != h) rule.positive_body.push_back(lit(c[i]).complement());
      }
      out.push_back(std::move(rule));
    }
  }
  return out;
}

}  // namespace lossprobe
