#include <algorithm>
#include <set>

#include "lossprobe/stpa.hpp"

namespace lossprobe::stpa {

std::vector<Formula> controller_formulas(const SafetyModel& model) {
  std::vector<Formula> out;
  if (model.controller == ControllerForm::control_constraints) {
    for (const auto& cc : model.control_constraints) out.push_back(cc.formula);
  } else {
    for (const auto& r : model.responsibilities) {
      out.insert(out.end(), r.control_logic.begin(), r.control_logic.end());
    }
  }
  return out;
}

namespace {

struct Labelled {
  std::string label;
  Formula formula;
};

std::vector<Labelled> labelled_controller(const SafetyModel& model) {
  std::vector<Labelled> out;
  if (model.controller == ControllerForm::control_constraints) {
    for (const auto& cc : model.control_constraints) out.push_back({cc.id, cc.formula});
  } else {
    for (const auto& r : model.responsibilities) {
      for (const auto& f : r.control_logic) out.push_back({r.id, f});
    }
  }
  return out;
}

}  // namespace

CompiledProgram compile_with_origins(const SafetyModel& model, const AssumptionSet& assumptions, const Formula& target,
                                     std::string_view target_label, const CompileOptions& options) {
  std::vector<const PropositionDecl*> chosen;
  for (const auto& p : model.propositions) {
    if (p.role == Role::environment) chosen.push_back(&p);
  }
  if (chosen.empty()) throw CompileError("model has no environment proposition to quantify over");

  std::vector<Labelled> defines;
  for (const auto& slot : assumptions.slots) defines.push_back({slot.id, slot.formula});
  for (auto& l : labelled_controller(model)) defines.push_back(std::move(l));

  if (options.quantification == Quantification::classical) {
    std::set<std::string, std::less<>> used;
    for (const auto& d : defines) {
      for (auto& p : d.formula.propositions()) used.insert(std::move(p));
    }
    for (auto& p : target.propositions()) used.insert(std::move(p));
    for (const auto& p : model.propositions) {
      if (p.role != Role::environment && used.contains(p.id)) chosen.push_back(&p);
    }
  }

  CompiledProgram out;
  auto& program = out.program;
  program.permit_choice_heads();
  for (const auto* p : chosen) program.add_choice(program.literal(p->atom));

  auto add = [&](elp::Clause c, std::string_view origin) {
    program.add_clause(std::move(c));
    out.clause_origin.emplace_back(origin);
  };
  try {
    for (const auto& d : defines) {
      for (auto& c : formula_to_clauses(d.formula, Polarity::define, program)) add(std::move(c), d.label);
    }
    for (auto& c : formula_to_clauses(target, Polarity::violate, program)) add(std::move(c), target_label);
  } catch (const FormulaError& e) {
    throw CompileError(e.what());
  }

  const auto violation = program.literal(kViolationAtom);
  add({violation.complement(), {}, {violation}}, "closure");
  add({program.literal(kHoldsAtom), {violation.complement()}, {}}, "closure");
  return out;
}

elp::Program compile_formula(const SafetyModel& model, const AssumptionSet& assumptions, const Formula& target,
                             const CompileOptions& options) {
  return compile_with_origins(model, assumptions, target, "target", options).program;
}

elp::Program compile_to_elp(const SafetyModel& model, const AssumptionSet& assumptions, std::string_view target_sc,
                            const CompileOptions& options) {
  const auto* sc = model.system_constraint(target_sc);
  if (!sc) throw CompileError("unknown system-level constraint '" + std::string(target_sc) + "'");
  return compile_with_origins(model, assumptions, sc->formula, sc->id, options).program;
}

}  // namespace lossprobe::stpa
