#include "lossprobe/elp.hpp"

#include <algorithm>

namespace lossprobe::elp {

Program reduct(const Program& program, const LiteralSet& candidate) {
  if (candidate.contradictory()) throw ProgramError("reduct requires a consistent candidate");
  Program out;
  for (const auto& name : program.atoms()) out.intern(name);
  for (const auto& clause : program.clauses()) {
    const bool blocked = std::any_of(clause.naf_body.begin(), clause.naf_body.end(),
                                     [&](Literal l) { return candidate.contains(l); });
    if (blocked) continue;
    out.add_clause({clause.head, clause.positive_body, {}});
  }
  // Each pair {L, -L} acts as `L :- not -L. -L :- not L.`
  for (auto atom : program.choice_atoms()) {
    const Literal pos{atom, false};
    const Literal neg{atom, true};
    if (!candidate.contains(neg)) out.add_clause({pos, {}, {}});
    if (!candidate.contains(pos)) out.add_clause({neg, {}, {}});
  }
  return out;
}

LeastModel least_model(const Program& positive_program) {
  if (positive_program.has_naf() || !positive_program.choices().empty()) {
    throw ProgramError("least_model requires a program without 'not' and without choices");
  }
  LeastModel result;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& clause : positive_program.clauses()) {
      if (result.literals.contains(clause.head)) continue;
      const bool fires = std::all_of(clause.positive_body.begin(), clause.positive_body.end(),
                                     [&](Literal l) { return result.literals.contains(l); });
      if (fires) {
        result.literals.insert(clause.head);
        changed = true;
      }
    }
  }
  result.contradictory = result.literals.contradictory();
  return result;
}

AnswerSetResult oracle_answer_sets(const Program& program) {
  program.validate();
  const std::size_t atoms = program.atom_count();
  if (atoms * 2 > kOracleMaxLiterals) {
    throw LimitError("oracle supports at most " + std::to_string(kOracleMaxLiterals) + " literals");
  }
  const auto choice_atoms = program.choice_atoms();

  AnswerSetResult result;
  bool contradictory_fixpoint = false;
  std::size_t total = 1;
  for (std::size_t i = 0; i < atoms; ++i) total *= 3;

  for (std::size_t code = 0; code < total; ++code) {
    LiteralSet candidate;
    std::size_t rest = code;
    for (std::size_t a = 0; a < atoms; ++a) {
      const auto digit = rest % 3;
      rest /= 3;
      if (digit == 1) candidate.insert({static_cast<AtomId>(a), false});
      if (digit == 2) candidate.insert({static_cast<AtomId>(a), true});
    }
    const auto model = least_model(reduct(program, candidate));
    if (!model.contradictory) {
      if (model.literals == candidate) result.answer_sets.push_back(candidate);
      continue;
    }
    const bool choice_complete = std::all_of(choice_atoms.begin(), choice_atoms.end(), [&](AtomId a) {
      return candidate.contains({a, false}) || candidate.contains({a, true});
    });
    if (choice_complete && candidate.subset_of(model.literals)) contradictory_fixpoint = true;
  }
  std::sort(result.answer_sets.begin(), result.answer_sets.end());
  result.inconsistent = result.answer_sets.empty() && contradictory_fixpoint;
  return result;
}

EntailmentResult entails(const Program& program, Literal goal, Entailment mode) {
  const auto result = answer_sets(program);
  EntailmentResult out;
  out.inconsistent = result.inconsistent;
  if (result.answer_sets.empty()) return out;
  if (mode == Entailment::brave) {
    out.holds = std::any_of(result.answer_sets.begin(), result.answer_sets.end(),
                            [&](const LiteralSet& s) { return s.contains(goal); });
  } else {
    out.holds = std::all_of(result.answer_sets.begin(), result.answer_sets.end(),
                            [&](const LiteralSet& s) { return s.contains(goal); });
  }
  return out;
}

EntailmentResult entails(const Program& program, std::string_view goal, Entailment mode) {
  const bool negated = !goal.empty() && goal.front() == '-';
  if (negated) goal.remove_prefix(1);
  if (auto atom = program.find(goal)) return entails(program, Literal{*atom, negated}, mode);
  const auto result = answer_sets(program);
  return {false, result.inconsistent};
}

}  // namespace lossprobe::elp
