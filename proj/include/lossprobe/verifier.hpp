#pragma once

// Consistency verification of a compiled safety model, systematic weakening
// of domain assumptions, and extraction of abstract loss scenarios from the
// proofs that break.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lossprobe/elp.hpp"
#include "lossprobe/formula.hpp"
#include "lossprobe/stpa.hpp"

namespace lossprobe::verify {

enum class Status { proved, refuted, inconsistent_model };
std::string_view to_string(Status s) noexcept;

inline constexpr std::size_t kMaxCounterexamples = 16;

/// `MV` or `!WT`.
std::string format_literal(const PropLiteral& l);
/// Literals joined with ` & `, e.g. `!WT & MV`.
std::string format_conjunction(const std::vector<PropLiteral>& literals);
/// Inverse of format_literal.
PropLiteral parse_literal(std::string_view text);

struct Counterexample {
  /// Answer set projected onto declared propositions, in declaration order.
  std::vector<PropLiteral> literals;
  /// One line per derived literal: how it entered the answer set.
  std::vector<std::string> trace;
};

struct Verdict {
  Status status = Status::proved;
  std::vector<Counterexample> counterexamples;  // at most kMaxCounterexamples
  std::size_t answer_set_count = 0;
  /// Derivation of sc_holds for a proof; empty when refuted.
  std::vector<std::string> argument_trace;
};

Verdict verify(const stpa::SafetyModel& model, const stpa::AssumptionSet& assumptions, std::string_view target_sc,
               const stpa::CompileOptions& options = {});

/// Anti-constraint: proved means `anti_sc` holds in every answer set, i.e. the
/// bad behaviour is forced by the assumptions and the controller.
Verdict prove_anti(const stpa::SafetyModel& model, const Formula& anti_sc, const stpa::AssumptionSet& assumptions,
                   const stpa::CompileOptions& options = {});

/// Verdict for an already compiled program.
Verdict verdict_of(const stpa::SafetyModel& model, const stpa::CompiledProgram& compiled);

enum class WeakeningKind { drop_forward, drop_backward, negate_forward, negate_backward, drop_all };
std::string_view to_string(WeakeningKind k) noexcept;
std::optional<WeakeningKind> weakening_kind_from_string(std::string_view s) noexcept;

struct Weakening {
  std::string slot;
  std::string domain;
  Formula original;
  Formula replacement;
  WeakeningKind kind = WeakeningKind::drop_all;
};

/// Replacement formula for `kind`, or nothing if the kind does not apply to
/// the shape of `original` or would not weaken it. For `A <-> B` (and
/// `A -> B` where noted):
///   drop_forward     B -> A
///   drop_backward    A -> B
///   negate_forward   !(A -> B) & (B -> A)      (A -> B: !(A -> B))
///   negate_backward  (A -> B) & !(B -> A)
///   drop_all         true                      (any formula)
/// Other shapes admit negate_forward as `!f` and drop_all.
std::optional<Formula> weaken(const Formula& original, WeakeningKind kind);

struct WeakeningResult {
  Weakening weakening;
  Verdict verdict;
};

/// Every applicable weakening of every assumption slot, verified against
/// `target_sc`; ordered by domain id, slot, then kind.
std::vector<WeakeningResult> weaken_assumptions(const stpa::SafetyModel& model, std::string_view target_sc,
                                                const stpa::CompileOptions& options = {});

struct AbstractLossScenario {
  std::string id;  // LS-1, LS-2, ...
  std::vector<PropLiteral> literals;
  Weakening source;
  std::string violated_sc;
  std::vector<std::string> hazards;
};

/// Scenarios from the refuted entries of `results`, deduplicated by literal
/// set. Literals are the environment propositions plus the plant propositions
/// the weakened assumption mentions. Hazards are those of the target SC that
/// also belong to another SC the counterexample violates; when there is no
/// such SC, all of the target's hazards.
std::vector<AbstractLossScenario> extract_scenarios(const std::vector<WeakeningResult>& results,
                                                    const stpa::SafetyModel& model, std::string_view target_sc);

}  // namespace lossprobe::verify
