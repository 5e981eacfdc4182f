#pragma once

// STPA artifacts (losses, hazards, constraints, responsibilities, control
// actions, the unsafe-control-action table) together with the problem-frame
// structure (domains carrying assumptions, shared phenomena), the `.stpa`
// reader, and compilation of a model into an ELP verification program.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lossprobe/bridge.hpp"
#include "lossprobe/elp.hpp"
#include "lossprobe/formula.hpp"

namespace lossprobe::stpa {

enum class ModelErrorKind {
  syntax,
  undeclared_proposition,
  dangling_reference,
  duplicate_id,
  malformed_formula,
  traceability,
};

class ModelError : public std::runtime_error {
public:
  ModelError(ModelErrorKind kind, std::size_t line, const std::string& what);
  ModelErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

private:
  ModelErrorKind kind_;
  std::size_t line_;
};

enum class Role { environment, plant, feedback, actuation, process_model };
std::string_view to_string(Role r) noexcept;

struct PropositionDecl {
  std::string id;  // e.g. MV_pm
  std::string atom;  // e.g. mv_pm
  std::string description;
  Role role = Role::plant;
};

struct Loss {
  std::string id, text;
};

struct Hazard {
  std::string id, text;
  std::vector<std::string> losses;
};

struct SystemConstraint {
  std::string id;
  Formula formula;
  std::string text;
  std::vector<std::string> hazards;
};

struct Responsibility {
  std::string id, text;
  std::string constraint;
  std::vector<Formula> control_logic;
};

struct ControlAction {
  std::string id, text;
  std::string responsibility;
};

struct ControlConstraint {
  std::string id;
  Formula formula;
  std::string text;
  std::vector<std::string> actions;
};

enum class UcaColumn { not_applied, applied, wrong_timing, wrong_duration };
inline constexpr std::array kUcaColumns{UcaColumn::not_applied, UcaColumn::applied, UcaColumn::wrong_timing,
                                        UcaColumn::wrong_duration};
std::string_view to_string(UcaColumn c) noexcept;

struct UcaEntry {
  bool applicable = false;  // false renders as N/A
  std::vector<std::string> hazards;
  std::string text;
};

struct UcaRow {
  std::string action;
  std::array<std::optional<UcaEntry>, 4> entries;
};

struct Domain {
  std::string id, text;
  std::string parent;  // empty for top-level domains
  bool machine = false;
  std::vector<Formula> assumptions;
};

struct SharedPhenomenon {
  std::string first, second;  // domain ids
  std::vector<std::string> propositions;
};

/// Which controller description is compiled into verification programs.
enum class ControllerForm { control_constraints, responsibilities };

struct SafetyModel {
  std::string name;
  ControllerForm controller = ControllerForm::control_constraints;
  std::vector<Loss> losses;
  std::vector<Hazard> hazards;
  std::vector<PropositionDecl> propositions;
  std::vector<SystemConstraint> system_constraints;
  std::vector<Responsibility> responsibilities;
  std::vector<ControlAction> control_actions;
  std::vector<ControlConstraint> control_constraints;
  std::vector<UcaRow> uca_table;
  std::vector<Domain> domains;
  std::vector<SharedPhenomenon> shared_phenomena;
  Bridge bridge;
  ParameterSpace space;
  /// Non-fatal traceability findings (e.g. a loss no hazard covers).
  std::vector<std::string> warnings;

  const PropositionDecl* proposition(std::string_view id) const;
  const PropositionDecl* proposition_by_atom(std::string_view atom) const;
  const SystemConstraint* system_constraint(std::string_view id) const;
  const Hazard* hazard(std::string_view id) const;
  const Domain* domain(std::string_view id) const;
};

enum class AssumptionTag { original, weakened, replaced };
std::string_view to_string(AssumptionTag t) noexcept;

/// One assumption position in the source model. Slot ids are the domain id
/// when the domain has one assumption, otherwise `<domain>.<n>` (1-based).
struct AssumptionSlot {
  std::string id;
  std::string domain;
  Formula formula;
  AssumptionTag tag = AssumptionTag::original;
  std::string note;
};

struct AssumptionSet {
  std::vector<AssumptionSlot> slots;

  /// The model's assumptions, all tagged original.
  static AssumptionSet original(const SafetyModel& model);

  const AssumptionSlot* find(std::string_view slot_id) const;
  /// Replaces a slot's formula. Throws std::out_of_range for an unknown slot.
  void replace(std::string_view slot_id, Formula formula, AssumptionTag tag, std::string note);
};

SafetyModel parse_model(std::string_view text);

/// How propositions are quantified in the compiled program.
enum class Quantification {
  /// Environment propositions, then every other proposition the program uses,
  /// receive `#choice` pairs: answer sets are exactly the classical models of
  /// assumptions and controller constraints.
  classical,
  /// Only environment propositions are chosen; the rest are derived, and
  /// anything underivable stays unknown under the closed world.
  environment_only,
};

struct CompileOptions {
  Quantification quantification = Quantification::classical;
};

/// Thrown when a model cannot be compiled (unknown target, nothing to quantify).
class CompileError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A compiled program with, for every clause, the model element it came from
/// (an assumption slot id, a CC or R id, the target id, or "closure").
struct CompiledProgram {
  elp::Program program;
  std::vector<std::string> clause_origin;
};

CompiledProgram compile_with_origins(const SafetyModel& model, const AssumptionSet& assumptions, const Formula& target,
                                     std::string_view target_label, const CompileOptions& options = {});

/// Verification program for `target_sc`: choices, assumption and controller
/// define-clauses, violate-clauses for the target, then
/// `-violation :- not violation.` and `sc_holds :- -violation.`
elp::Program compile_to_elp(const SafetyModel& model, const AssumptionSet& assumptions, std::string_view target_sc,
                            const CompileOptions& options = {});

/// Same as compile_to_elp with an arbitrary target formula (used for
/// anti-constraints).
elp::Program compile_formula(const SafetyModel& model, const AssumptionSet& assumptions, const Formula& target,
                             const CompileOptions& options = {});

/// Formulas the controller contributes under the model's ControllerForm.
std::vector<Formula> controller_formulas(const SafetyModel& model);

}  // namespace lossprobe::stpa
