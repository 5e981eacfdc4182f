#pragma once

// Propositional Extended Logic Programs: clauses with classical negation in
// heads and bodies, negation-as-failure in bodies, and free `#choice` pairs.
// Answer sets follow Gelfond-Lifschitz stable-model semantics, except that a
// contradictory program is reported through a flag instead of yielding the
// set of all literals.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lossprobe::elp {

using AtomId = std::uint32_t;

/// Maximum number of distinct literals (2 per atom) a program may mention.
inline constexpr std::size_t kMaxLiterals = 256;
inline constexpr std::size_t kMaxAtoms = kMaxLiterals / 2;
/// Size bound for the exhaustive oracle.
inline constexpr std::size_t kOracleMaxLiterals = 20;

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

/// Structural problem with a program (dangling atom, literal in both bodies, ...).
class ProgramError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Program exceeds the solver's literal limit.
class LimitError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Literal {
  AtomId atom = 0;
  bool negated = false;  // classical negation

  Literal complement() const noexcept { return {atom, !negated}; }
  std::size_t index() const noexcept { return std::size_t{atom} * 2 + (negated ? 1 : 0); }
  static Literal from_index(std::size_t i) noexcept {
    return {static_cast<AtomId>(i / 2), (i % 2) != 0};
  }

  friend auto operator<=>(const Literal&, const Literal&) = default;
};

/// Fixed-capacity set of literals, indexed by Literal::index(). Ordering is
/// numeric on the bitmask (highest word first), which is the canonical order
/// for answer sets.
class LiteralSet {
public:
  static constexpr std::size_t kWords = kMaxLiterals / 64;

  void insert(Literal l) noexcept { set_bit(l.index()); }
  void erase(Literal l) noexcept { words_[l.index() / 64] &= ~(std::uint64_t{1} << (l.index() % 64)); }
  bool contains(Literal l) const noexcept { return test_bit(l.index()); }
  bool empty() const noexcept;
  std::size_t size() const noexcept;
  /// True iff some atom occurs with both polarities.
  bool contradictory() const noexcept;
  bool subset_of(const LiteralSet& other) const noexcept;
  std::vector<Literal> literals() const;

  LiteralSet& operator|=(const LiteralSet& other) noexcept;

  friend bool operator==(const LiteralSet&, const LiteralSet&) = default;
  friend std::strong_ordering operator<=>(const LiteralSet& a, const LiteralSet& b) noexcept;

private:
  void set_bit(std::size_t i) noexcept { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test_bit(std::size_t i) const noexcept { return (words_[i / 64] >> (i % 64)) & 1U; }

  std::array<std::uint64_t, kWords> words_{};
};

struct Clause {
  Literal head;
  std::vector<Literal> positive_body;
  std::vector<Literal> naf_body;

  bool is_fact() const noexcept { return positive_body.empty() && naf_body.empty(); }
  friend bool operator==(const Clause&, const Clause&) = default;
};

/// A `#choice` directive. `position` is the number of clauses that preceded it
/// in the source, so printing reproduces the original statement order.
struct ChoiceDecl {
  Literal literal;
  std::size_t position = 0;
  friend bool operator==(const ChoiceDecl&, const ChoiceDecl&) = default;
};

class Program {
public:
  /// Returns the id for `name`, registering it on first use. Names must be
  /// valid atom identifiers and must not clash case-insensitively with an
  /// existing, differently spelled atom.
  AtomId intern(std::string_view name);
  std::optional<AtomId> find(std::string_view name) const;
  const std::string& name(AtomId id) const { return atoms_.at(id); }
  std::size_t atom_count() const noexcept { return atoms_.size(); }
  const std::vector<std::string>& atoms() const noexcept { return atoms_; }

  Literal literal(std::string_view name, bool negated = false) { return {intern(name), negated}; }

  void add_clause(Clause clause);
  void add_choice(Literal literal);

  const std::vector<Clause>& clauses() const noexcept { return clauses_; }
  const std::vector<ChoiceDecl>& choices() const noexcept { return choices_; }
  /// Atoms carrying a choice pair, in first-declaration order, without duplicates.
  std::vector<AtomId> choice_atoms() const;
  bool is_choice_atom(AtomId atom) const;

  bool choice_heads_permitted() const noexcept { return permit_choice_heads_; }
  void permit_choice_heads(bool on = true) noexcept { permit_choice_heads_ = on; }

  bool has_naf() const noexcept;

  /// Checks the structural invariants; throws ProgramError.
  void validate() const;

  std::string to_string(Literal l) const;

  friend bool operator==(const Program&, const Program&) = default;

private:
  std::vector<std::string> atoms_;
  std::map<std::string, AtomId, std::less<>> index_;
  std::vector<Clause> clauses_;
  std::vector<ChoiceDecl> choices_;
  bool permit_choice_heads_ = false;
};

bool is_atom_name(std::string_view name) noexcept;

Program parse_program(std::string_view text);
/// Renders a program in the `.elp` text format accepted by parse_program.
std::string print_program(const Program& program);
std::string print_clause(const Program& program, const Clause& clause);

/// Gelfond-Lifschitz reduct. Clauses whose naf body meets `candidate` are
/// removed, surviving naf bodies are stripped, and each choice pair
/// {L, -L} contributes L as a fact when -L is not in `candidate` (so an
/// undecided pair contributes both and the candidate cannot be stable).
/// The result has no choices. Throws ProgramError on an inconsistent candidate.
Program reduct(const Program& program, const LiteralSet& candidate);

struct LeastModel {
  LiteralSet literals;
  bool contradictory = false;
};

/// Least set of literals closed under a naf-free, choice-free program.
LeastModel least_model(const Program& positive_program);

struct AnswerSetResult {
  std::vector<LiteralSet> answer_sets;  // canonical order
  bool inconsistent = false;
};

/// Enumerates all answer sets by branch-and-check over the literals the
/// reduct depends on, with well-founded style bound propagation.
AnswerSetResult answer_sets(const Program& program);

/// Brute-force reference: every assignment of each atom to {in, complement in,
/// absent} is checked against the definition using reduct() and least_model().
AnswerSetResult oracle_answer_sets(const Program& program);

enum class Entailment { brave, cautious };

struct EntailmentResult {
  bool holds = false;
  bool inconsistent = false;
};

EntailmentResult entails(const Program& program, Literal goal, Entailment mode);
/// Same, with the goal written as `p` or `-p`. An atom the program never
/// mentions is in no answer set.
EntailmentResult entails(const Program& program, std::string_view goal, Entailment mode);

/// Renders answer sets like `{mv, -wt}` using atom names.
std::string format_answer_set(const Program& program, const LiteralSet& set);

}  // namespace lossprobe::elp
