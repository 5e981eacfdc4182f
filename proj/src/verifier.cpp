#include "lossprobe/verifier.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace lossprobe::verify {

std::string_view to_string(Status s) noexcept {
  switch (s) {
    case Status::proved: return "proved";
    case Status::refuted: return "refuted";
    case Status::inconsistent_model: return "inconsistent_model";
  }
  return "?";
}

std::string_view to_string(WeakeningKind k) noexcept {
  switch (k) {
    case WeakeningKind::drop_forward: return "drop_forward";
    case WeakeningKind::drop_backward: return "drop_backward";
    case WeakeningKind::negate_forward: return "negate_forward";
    case WeakeningKind::negate_backward: return "negate_backward";
    case WeakeningKind::drop_all: return "drop_all";
  }
  return "?";
}

std::optional<WeakeningKind> weakening_kind_from_string(std::string_view s) noexcept {
  for (auto k : {WeakeningKind::drop_forward, WeakeningKind::drop_backward, WeakeningKind::negate_forward,
                 WeakeningKind::negate_backward, WeakeningKind::drop_all}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string format_literal(const PropLiteral& l) { return (l.negated ? "!" : "") + l.id; }

std::string format_conjunction(const std::vector<PropLiteral>& literals) {
  std::string out;
  for (const auto& l : literals) {
    if (!out.empty()) out += " & ";
    out += format_literal(l);
  }
  return out;
}

PropLiteral parse_literal(std::string_view text) {
  PropLiteral l;
  if (!text.empty() && text.front() == '!') {
    l.negated = true;
    text.remove_prefix(1);
  }
  if (text.empty()) throw std::invalid_argument("empty literal");
  l.id = std::string(text);
  return l;
}

namespace {

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

// Replays how the literals of `s` arise: environment choices first, then
// clause applications in program order until nothing new fires, then any
// remaining choice the program leaves unconstrained.
std::vector<std::string> derivation(const stpa::SafetyModel& model, const stpa::CompiledProgram& compiled,
                                    const elp::LiteralSet& s) {
  const auto& p = compiled.program;
  std::vector<std::string> out;
  elp::LiteralSet derived;

  auto choose = [&](bool environment) {
    for (const auto& c : p.choices()) {
      const auto* decl = model.proposition_by_atom(p.name(c.literal.atom));
      if (!decl || (decl->role == stpa::Role::environment) != environment) continue;
      for (bool neg : {false, true}) {
        const elp::Literal l{c.literal.atom, neg};
        if (s.contains(l) && !derived.contains(l)) {
          derived.insert(l);
          out.push_back(pad(p.to_string(l), 14) + "chosen (" + (environment ? "environment" : "unconstrained") + ")");
        }
      }
    }
  };
  auto chain = [&] {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < p.clauses().size(); ++i) {
        const auto& c = p.clauses()[i];
        if (derived.contains(c.head) || !s.contains(c.head)) continue;
        const bool fires =
            std::all_of(c.positive_body.begin(), c.positive_body.end(), [&](auto l) { return derived.contains(l); }) &&
            std::none_of(c.naf_body.begin(), c.naf_body.end(), [&](auto l) { return s.contains(l); });
        if (!fires) continue;
        derived.insert(c.head);
        out.push_back(pad(p.to_string(c.head), 14) + "<- " + compiled.clause_origin[i] + ": " + elp::print_clause(p, c));
        changed = true;
      }
    }
  };

  choose(true);
  chain();
  const auto before = out.size();
  choose(false);
  if (out.size() != before) chain();
  return out;
}

std::vector<PropLiteral> project(const stpa::SafetyModel& model, const elp::Program& p, const elp::LiteralSet& s) {
  std::vector<PropLiteral> out;
  for (const auto& decl : model.propositions) {
    const auto atom = p.find(decl.atom);
    if (!atom) continue;
    if (s.contains({*atom, false})) out.push_back({decl.id, false});
    if (s.contains({*atom, true})) out.push_back({decl.id, true});
  }
  return out;
}

}  // namespace

Verdict verdict_of(const stpa::SafetyModel& model, const stpa::CompiledProgram& compiled) {
  const auto& p = compiled.program;
  const auto result = elp::answer_sets(p);
  Verdict v;
  v.answer_set_count = result.answer_sets.size();
  if (result.answer_sets.empty()) {
    v.status = Status::inconsistent_model;
    return v;
  }
  const auto violation = p.find(kViolationAtom);
  const auto holds = p.find(kHoldsAtom);
  bool all_hold = true;
  for (const auto& s : result.answer_sets) {
    if (!holds || !s.contains({*holds, false})) all_hold = false;
    if (violation && s.contains({*violation, false}) && v.counterexamples.size() < kMaxCounterexamples) {
      v.counterexamples.push_back({project(model, p, s), derivation(model, compiled, s)});
    }
  }
  if (!v.counterexamples.empty() || !all_hold) {
    v.status = Status::refuted;
    return v;
  }
  v.status = Status::proved;
  for (std::size_t i = 0; i < result.answer_sets.size() && i < kMaxCounterexamples; ++i) {
    v.argument_trace.push_back("answer set " + std::to_string(i + 1) + ":");
    for (auto& line : derivation(model, compiled, result.answer_sets[i])) v.argument_trace.push_back("  " + line);
  }
  return v;
}

Verdict verify(const stpa::SafetyModel& model, const stpa::AssumptionSet& assumptions, std::string_view target_sc,
               const stpa::CompileOptions& options) {
  const auto* sc = model.system_constraint(target_sc);
  if (!sc) throw stpa::CompileError("unknown system-level constraint '" + std::string(target_sc) + "'");
  return verdict_of(model, stpa::compile_with_origins(model, assumptions, sc->formula, sc->id, options));
}

Verdict prove_anti(const stpa::SafetyModel& model, const Formula& anti_sc, const stpa::AssumptionSet& assumptions,
                   const stpa::CompileOptions& options) {
  return verdict_of(model, stpa::compile_with_origins(model, assumptions, anti_sc, "anti", options));
}

std::optional<Formula> weaken(const Formula& original, WeakeningKind kind) {
  using K = Formula::Kind;
  std::optional<Formula> out;
  if (kind == WeakeningKind::drop_all) {
    out = Formula::constant(true);
  } else if (original.kind() == K::biconditional) {
    const auto& a = original.lhs();
    const auto& b = original.rhs();
    const auto fwd = Formula::implication(a, b);
    const auto bwd = Formula::implication(b, a);
    switch (kind) {
      case WeakeningKind::drop_forward: out = bwd; break;
      case WeakeningKind::drop_backward: out = fwd; break;
      case WeakeningKind::negate_forward: out = Formula::conjunction(Formula::negation(fwd), bwd); break;
      case WeakeningKind::negate_backward: out = Formula::conjunction(fwd, Formula::negation(bwd)); break;
      case WeakeningKind::drop_all: break;
    }
  } else if (kind == WeakeningKind::negate_forward) {
    out = Formula::negation(original);
  }
  // A weakening must not entail what it replaces.
  if (out && entails_classically(*out, original)) return std::nullopt;
  return out;
}

std::vector<WeakeningResult> weaken_assumptions(const stpa::SafetyModel& model, std::string_view target_sc,
                                                const stpa::CompileOptions& options) {
  const auto original = stpa::AssumptionSet::original(model);
  std::vector<std::size_t> order(original.slots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](auto x, auto y) { return original.slots[x].domain < original.slots[y].domain; });

  std::vector<WeakeningResult> out;
  for (auto i : order) {
    const auto& slot = original.slots[i];
    for (auto kind : {WeakeningKind::drop_forward, WeakeningKind::drop_backward, WeakeningKind::negate_forward,
                      WeakeningKind::negate_backward, WeakeningKind::drop_all}) {
      auto replacement = weaken(slot.formula, kind);
      if (!replacement) continue;
      auto set = original;
      set.replace(slot.id, *replacement, stpa::AssumptionTag::weakened, std::string(to_string(kind)));
      Weakening w{slot.id, slot.domain, slot.formula, *replacement, kind};
      out.push_back({std::move(w), verify(model, set, target_sc, options)});
    }
  }
  return out;
}

std::vector<AbstractLossScenario> extract_scenarios(const std::vector<WeakeningResult>& results,
                                                    const stpa::SafetyModel& model, std::string_view target_sc) {
  const auto* target = model.system_constraint(target_sc);
  if (!target) throw stpa::CompileError("unknown system-level constraint '" + std::string(target_sc) + "'");

  std::vector<AbstractLossScenario> out;
  std::set<std::vector<PropLiteral>> seen;
  for (const auto& r : results) {
    if (r.verdict.status != Status::refuted) continue;
    std::set<std::string, std::less<>> mentioned;
    for (auto& p : r.weakening.original.propositions()) mentioned.insert(std::move(p));
    for (auto& p : r.weakening.replacement.propositions()) mentioned.insert(std::move(p));

    for (const auto& cx : r.verdict.counterexamples) {
      std::vector<PropLiteral> literals;
      std::map<std::string, bool, std::less<>> assignment;
      for (const auto& l : cx.literals) {
        assignment[l.id] = !l.negated;
        const auto* decl = model.proposition(l.id);
        const bool env = decl->role == stpa::Role::environment;
        const bool plant = decl->role == stpa::Role::plant;
        if (env || (plant && mentioned.contains(l.id))) literals.push_back(l);
      }
      if (literals.empty() || !seen.insert(literals).second) continue;

      std::vector<std::string> hazards;
      for (const auto& sc : model.system_constraints) {
        if (sc.id == target->id) continue;
        const auto props = sc.formula.propositions();
        const bool assigned = std::all_of(props.begin(), props.end(), [&](auto& p) { return assignment.contains(p); });
        if (!assigned || sc.formula.evaluate(assignment)) continue;
        for (const auto& h : sc.hazards) {
          const bool shared = std::find(target->hazards.begin(), target->hazards.end(), h) != target->hazards.end();
          if (shared && std::find(hazards.begin(), hazards.end(), h) == hazards.end()) hazards.push_back(h);
        }
      }
      if (hazards.empty()) {
        hazards = target->hazards;
      } else {
        // Keep the target's order.
        std::vector<std::string> ordered;
        for (const auto& h : target->hazards) {
          if (std::find(hazards.begin(), hazards.end(), h) != hazards.end()) ordered.push_back(h);
        }
        hazards = std::move(ordered);
      }

      AbstractLossScenario sc;
      sc.id = "LS-" + std::to_string(out.size() + 1);
      sc.literals = std::move(literals);
      sc.source = r.weakening;
      sc.violated_sc = target->id;
      sc.hazards = std::move(hazards);
      out.push_back(std::move(sc));
    }
  }
  return out;
}

}  // namespace lossprobe::verify
