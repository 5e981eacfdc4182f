#pragma once

// Propositional formulas over named propositions (ASCII syntax `!`, `&`, `|`,
// `->`, `<->`, `true`, `false`) and their lowering to ELP clauses.

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lossprobe/elp.hpp"

namespace lossprobe {

class FormulaError : public std::runtime_error {
public:
  FormulaError(std::size_t column, const std::string& what);
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t column_;
};

class Formula {
public:
  enum class Kind { constant, proposition, negation, conjunction, disjunction, implication, biconditional };

  Formula() = default;  // the constant `true`

  static Formula constant(bool value);
  static Formula prop(std::string id);
  static Formula negation(Formula f);
  static Formula conjunction(Formula a, Formula b);
  static Formula disjunction(Formula a, Formula b);
  static Formula implication(Formula a, Formula b);
  static Formula biconditional(Formula a, Formula b);

  Kind kind() const noexcept { return kind_; }
  /// Proposition id; only meaningful for Kind::proposition.
  const std::string& id() const noexcept { return id_; }
  bool value() const noexcept { return value_; }
  const std::vector<Formula>& operands() const noexcept { return operands_; }
  const Formula& lhs() const { return operands_.at(0); }
  const Formula& rhs() const { return operands_.at(1); }

  bool evaluate(const std::map<std::string, bool, std::less<>>& assignment) const;
  /// Proposition ids in first-occurrence order.
  std::vector<std::string> propositions() const;
  /// Largest number of `<->` nodes on a root-to-leaf path.
  int biconditional_depth() const noexcept;

  friend bool operator==(const Formula&, const Formula&) = default;

private:
  Kind kind_ = Kind::constant;
  bool value_ = true;
  std::string id_;
  std::vector<Formula> operands_;
};

Formula parse_formula(std::string_view text);
std::string to_string(const Formula& f);

/// Classical truth-table check over the union of both formulas' propositions.
bool entails_classically(const Formula& premise, const Formula& conclusion);
bool equivalent_classically(const Formula& a, const Formula& b);

/// A literal of the lowered form, named by proposition id.
struct PropLiteral {
  std::string id;
  bool negated = false;
  friend auto operator<=>(const PropLiteral&, const PropLiteral&) = default;
};

/// Conjunctive normal form; tautological clauses are dropped and duplicate
/// literals merged. `false` yields one empty clause, `true` no clauses.
std::vector<std::vector<PropLiteral>> to_cnf(const Formula& f);

enum class Polarity { define, violate };

/// Atom name a proposition id lowers to (`MV_pm` -> `mv_pm`).
std::string atom_name(std::string_view proposition_id);

inline constexpr std::string_view kViolationAtom = "violation";
inline constexpr std::string_view kHoldsAtom = "sc_holds";
inline constexpr std::string_view kFalsumAtom = "falsum";
inline constexpr int kMaxBiconditionalDepth = 2;

/// Lowers `f` to clauses over atoms interned into `symbols`.
///
/// define: each CNF clause (l1 | ... | lk) becomes k rules, one per literal,
/// with the complements of the others as body, so `A -> B` yields
/// `b :- a.` and `-a :- -b.`, and `A <-> B` yields both directions with
/// contrapositives. Unit clauses become facts; `false` becomes `falsum. -falsum.`
///
/// violate: `!f` in disjunctive normal form, one `violation :- <conjunct>.`
/// per disjunct.
std::vector<elp::Clause> formula_to_clauses(const Formula& f, Polarity polarity, elp::Program& symbols);

}  // namespace lossprobe
