#include "lossprobe/verifier.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

using namespace lossprobe;
using namespace lossprobe::verify;

namespace {

stpa::SafetyModel dlcu() {
  std::ifstream in(std::string(LOSSPROBE_SOURCE_DIR) + "/models/dlcu.stpa");
  std::stringstream ss;
  ss << in.rdbuf();
  return stpa::parse_model(ss.str());
}

std::set<std::string> literal_strings(const std::vector<PropLiteral>& ls) {
  std::set<std::string> out;
  for (const auto& l : ls) out.insert(format_literal(l));
  return out;
}

bool includes(const std::set<std::string>& big, const std::set<std::string>& small) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

stpa::AssumptionSet with(const stpa::SafetyModel& m, std::string_view slot, std::string_view formula) {
  auto a = stpa::AssumptionSet::original(m);
  a.replace(slot, parse_formula(formula), stpa::AssumptionTag::replaced, "test");
  return a;
}

const WeakeningResult& find(const std::vector<WeakeningResult>& rs, std::string_view slot, WeakeningKind kind) {
  for (const auto& r : rs) {
    if (r.weakening.slot == slot && r.weakening.kind == kind) return r;
  }
  throw std::logic_error("no such weakening");
}

}  // namespace

TEST(Verify, OriginalAssumptionsProveSc3) {
  const auto m = dlcu();
  const auto v = verify::verify(m, stpa::AssumptionSet::original(m), "SC-3");
  EXPECT_EQ(v.status, Status::proved);
  EXPECT_TRUE(v.counterexamples.empty());
  EXPECT_EQ(v.answer_set_count, 2U);
  EXPECT_FALSE(v.argument_trace.empty());
  for (const auto* sc : {"SC-1", "SC-2"}) {
    EXPECT_EQ(verify::verify(m, stpa::AssumptionSet::original(m), sc).status, Status::proved) << sc;
  }
}

TEST(Verify, WeakenedRoadRefutesSc3) {
  const auto m = dlcu();
  const auto v = verify::verify(m, with(m, "Road", "(WT -> MV) & !(MV -> WT)"), "SC-3");
  ASSERT_EQ(v.status, Status::refuted);
  ASSERT_EQ(v.counterexamples.size(), 1U);
  EXPECT_EQ(literal_strings(v.counterexamples[0].literals),
            (std::set<std::string>{"MV", "!WT", "!WP", "!DS", "!DL"}));
  const auto& trace = v.counterexamples[0].trace;
  ASSERT_FALSE(trace.empty());
  EXPECT_NE(trace.back().find("violation :- mv, -dl."), std::string::npos);
  EXPECT_NE(trace.front().find("chosen (environment)"), std::string::npos);
}

TEST(Verify, DroppedDoorAssumptionRefutes) {
  const auto m = dlcu();
  EXPECT_EQ(verify::verify(m, with(m, "Doors", "true"), "SC-3").status, Status::refuted);
}

TEST(Verify, ContradictoryAssumptionsAreInconsistent) {
  const auto m = dlcu();
  EXPECT_EQ(verify::verify(m, with(m, "Road", "false"), "SC-3").status, Status::inconsistent_model);
  EXPECT_EQ(verify::verify(m, with(m, "Road", "MV & !MV"), "SC-3").status, Status::inconsistent_model);
}

TEST(Verify, UnknownTarget) {
  const auto m = dlcu();
  EXPECT_THROW(verify::verify(m, stpa::AssumptionSet::original(m), "SC-8"), stpa::CompileError);
}

TEST(Weaken, Catalogue) {
  const auto iff = parse_formula("WT <-> MV");
  EXPECT_EQ(*weaken(iff, WeakeningKind::drop_forward), parse_formula("MV -> WT"));
  EXPECT_EQ(*weaken(iff, WeakeningKind::drop_backward), parse_formula("WT -> MV"));
  EXPECT_EQ(*weaken(iff, WeakeningKind::negate_forward), parse_formula("!(WT -> MV) & (MV -> WT)"));
  EXPECT_EQ(*weaken(iff, WeakeningKind::negate_backward), parse_formula("(WT -> MV) & !(MV -> WT)"));
  EXPECT_EQ(*weaken(iff, WeakeningKind::drop_all), Formula::constant(true));

  const auto imp = parse_formula("A -> B");
  EXPECT_FALSE(weaken(imp, WeakeningKind::drop_forward));
  EXPECT_EQ(*weaken(imp, WeakeningKind::negate_forward), parse_formula("!(A -> B)"));
  EXPECT_FALSE(weaken(Formula::constant(true), WeakeningKind::drop_all));
}

TEST(Weaken, ReplacementsNeverEntailTheOriginal) {
  for (auto text : {"WT <-> MV", "A -> B", "A & B", "A | B", "!A", "(A <-> B) & C"}) {
    const auto f = parse_formula(text);
    for (auto kind : {WeakeningKind::drop_forward, WeakeningKind::drop_backward, WeakeningKind::negate_forward,
                      WeakeningKind::negate_backward, WeakeningKind::drop_all}) {
      if (auto r = weaken(f, kind)) {
        EXPECT_FALSE(entails_classically(*r, f)) << text << " " << to_string(kind);
      }
    }
  }
}

TEST(WeakenAssumptions, EverySlotYieldsARefutation) {
  const auto m = dlcu();
  const auto rs = weaken_assumptions(m, "SC-3");
  ASSERT_EQ(rs.size(), 15U);
  for (const auto* slot : {"Wheels", "Doors", "Road"}) {
    EXPECT_TRUE(std::any_of(rs.begin(), rs.end(), [&](const auto& r) {
      return r.weakening.slot == slot && r.verdict.status == Status::refuted;
    })) << slot;
  }
  const auto& road = find(rs, "Road", WeakeningKind::negate_backward);
  ASSERT_EQ(road.verdict.status, Status::refuted);
  EXPECT_TRUE(includes(literal_strings(road.verdict.counterexamples[0].literals), {"!WT", "MV"}));
}

TEST(WeakenAssumptions, OrderedByDomainThenKind) {
  const auto rs = weaken_assumptions(dlcu(), "SC-3");
  for (std::size_t i = 1; i < rs.size(); ++i) {
    const auto& a = rs[i - 1].weakening;
    const auto& b = rs[i].weakening;
    EXPECT_TRUE(a.domain < b.domain || (a.domain == b.domain && a.kind < b.kind));
  }
}

TEST(WeakenAssumptions, NoAssumptionsNoResults) {
  auto m = dlcu();
  for (auto& d : m.domains) d.assumptions.clear();
  EXPECT_TRUE(weaken_assumptions(m, "SC-3").empty());
}

TEST(ExtractScenarios, RoadScenario) {
  const auto m = dlcu();
  const auto rs = weaken_assumptions(m, "SC-3");
  const std::vector<WeakeningResult> road{find(rs, "Road", WeakeningKind::negate_backward)};
  const auto sc = extract_scenarios(road, m, "SC-3");
  ASSERT_EQ(sc.size(), 1U);
  EXPECT_EQ(sc[0].id, "LS-1");
  EXPECT_EQ(format_conjunction(sc[0].literals), "!WT & MV");
  EXPECT_EQ(sc[0].hazards, std::vector<std::string>{"H-1"});
  EXPECT_EQ(sc[0].violated_sc, "SC-3");
  EXPECT_EQ(sc[0].source.slot, "Road");
}

TEST(ExtractScenarios, Deduplicates) {
  const auto m = dlcu();
  const auto rs = weaken_assumptions(m, "SC-3");
  const std::vector<WeakeningResult> twice{find(rs, "Road", WeakeningKind::drop_backward),
                                           find(rs, "Road", WeakeningKind::negate_backward)};
  EXPECT_EQ(extract_scenarios(twice, m, "SC-3").size(), 1U);

  const auto all = extract_scenarios(rs, m, "SC-3");
  std::set<std::set<std::string>> unique;
  for (const auto& s : all) unique.insert(literal_strings(s.literals));
  EXPECT_EQ(unique.size(), all.size());
}

TEST(ExtractScenarios, ProvedOnlyGivesNothing) {
  const auto m = dlcu();
  WeakeningResult proved{{}, verify::verify(m, stpa::AssumptionSet::original(m), "SC-3")};
  EXPECT_TRUE(extract_scenarios({proved}, m, "SC-3").empty());
}

TEST(ProveAnti, ReplacedRoadForcesTheHazard) {
  const auto m = dlcu();
  const auto anti = parse_formula("MV -> !DL");
  EXPECT_EQ(prove_anti(m, anti, with(m, "Road", "MV -> !WT")).status, Status::proved);
  EXPECT_EQ(prove_anti(m, anti, stpa::AssumptionSet::original(m)).status, Status::refuted);
  EXPECT_EQ(verify::verify(m, stpa::AssumptionSet::original(m), "SC-3").status, Status::proved);
}

TEST(ProveAnti, TautologyIsProved) {
  const auto m = dlcu();
  const auto taut = parse_formula("MV -> MV");
  EXPECT_EQ(prove_anti(m, taut, stpa::AssumptionSet::original(m)).status, Status::proved);
  EXPECT_EQ(prove_anti(m, taut, with(m, "Road", "true")).status, Status::proved);
}

TEST(Literals, FormatAndParse) {
  EXPECT_EQ(format_literal({"WT", true}), "!WT");
  EXPECT_EQ(parse_literal("!WT"), (PropLiteral{"WT", true}));
  EXPECT_EQ(parse_literal("MV"), (PropLiteral{"MV", false}));
  EXPECT_THROW(parse_literal("!"), std::invalid_argument);
}

namespace {

const std::vector<std::string> kDlcuProps{"WT", "DL", "WP", "DS", "MV"};

Formula random_formula(std::mt19937_64& rng, int depth) {
  auto prop = [&] { return Formula::prop(kDlcuProps[rng() % kDlcuProps.size()]); };
  if (depth == 0) return prop();
  switch (rng() % 6) {
    case 0: return prop();
    case 1: return Formula::negation(random_formula(rng, depth - 1));
    case 2: return Formula::conjunction(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 3: return Formula::disjunction(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 4: return Formula::implication(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    default: return Formula::biconditional(prop(), prop());
  }
}

stpa::AssumptionSet random_assumptions(const stpa::SafetyModel& m, std::mt19937_64& rng) {
  auto a = stpa::AssumptionSet::original(m);
  for (auto& slot : a.slots) {
    if (rng() % 2) slot.formula = random_formula(rng, 2);
  }
  return a;
}

std::map<std::string, bool, std::less<>> assignment(const Counterexample& cx) {
  std::map<std::string, bool, std::less<>> a;
  for (const auto& l : cx.literals) a[l.id] = !l.negated;
  return a;
}

}  // namespace

// Each counterexample satisfies every assumption and control constraint and
// falsifies the target, checked by direct evaluation.
TEST(VerifierProperty, CounterexamplesAreClassicalWitnesses) {
  const auto m = dlcu();
  std::mt19937_64 rng(11);
  int refuted = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_assumptions(m, rng);
    for (const auto& sc : m.system_constraints) {
      const auto v = verify::verify(m, a, sc.id);
      if (v.status != Status::refuted) continue;
      ++refuted;
      for (const auto& cx : v.counterexamples) {
        const auto val = assignment(cx);
        for (const auto& slot : a.slots) EXPECT_TRUE(slot.formula.evaluate(val)) << to_string(slot.formula);
        for (const auto& cc : m.control_constraints) EXPECT_TRUE(cc.formula.evaluate(val)) << cc.id;
        EXPECT_FALSE(sc.formula.evaluate(val)) << sc.id;
      }
    }
  }
  EXPECT_GT(refuted, 50);
}

// Proof verdicts agree with a truth table over all five propositions.
TEST(VerifierProperty, AgreesWithTruthTable) {
  const auto m = dlcu();
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_assumptions(m, rng);
    for (const auto& sc : m.system_constraints) {
      bool any_model = false, any_violation = false;
      for (unsigned bits = 0; bits < 32; ++bits) {
        std::map<std::string, bool, std::less<>> val;
        for (std::size_t i = 0; i < kDlcuProps.size(); ++i) val[kDlcuProps[i]] = (bits >> i) & 1U;
        bool ok = true;
        for (const auto& slot : a.slots) ok = ok && slot.formula.evaluate(val);
        for (const auto& cc : m.control_constraints) ok = ok && cc.formula.evaluate(val);
        if (!ok) continue;
        any_model = true;
        any_violation = any_violation || !sc.formula.evaluate(val);
      }
      const auto expected = !any_model ? Status::inconsistent_model : any_violation ? Status::refuted : Status::proved;
      EXPECT_EQ(verify::verify(m, a, sc.id).status, expected);
    }
  }
}

TEST(VerifierProperty, Exclusivity) {
  const auto m = dlcu();
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_assumptions(m, rng);
    for (const auto& sc : m.system_constraints) {
      const auto pro = verify::verify(m, a, sc.id);
      const auto anti = prove_anti(m, Formula::negation(sc.formula), a);
      if (pro.status == Status::inconsistent_model) continue;
      EXPECT_FALSE(pro.status == Status::proved && anti.status == Status::proved);
    }
  }
}

TEST(VerifierProperty, WeakeningIsMonotone) {
  const auto m = dlcu();
  for (const auto& sc : m.system_constraints) {
    const auto original = verify::verify(m, stpa::AssumptionSet::original(m), sc.id);
    for (const auto& r : weaken_assumptions(m, sc.id)) {
      if (r.verdict.status == Status::proved) {
        EXPECT_EQ(original.status, Status::proved);
      }
    }
  }
}

TEST(VerifierProperty, ScenariosAreSatisfiable) {
  const auto m = dlcu();
  for (const auto& target : m.system_constraints) {
    const auto rs = weaken_assumptions(m, target.id);
    for (const auto& s : extract_scenarios(rs, m, target.id)) {
      auto a = stpa::AssumptionSet::original(m);
      a.replace(s.source.slot, s.source.replacement, stpa::AssumptionTag::weakened, "");
      const auto program = stpa::compile_to_elp(m, a, target.id);
      elp::LiteralSet wanted;
      for (const auto& l : s.literals) wanted.insert({*program.find(atom_name(l.id)), l.negated});
      const auto sets = elp::answer_sets(program).answer_sets;
      EXPECT_TRUE(std::any_of(sets.begin(), sets.end(), [&](const auto& x) { return wanted.subset_of(x); }))
          << s.id << " " << format_conjunction(s.literals);
    }
  }
}

TEST(VerifierProperty, ResponsibilityFormAgrees) {
  auto m = dlcu();
  auto r = m;
  r.controller = stpa::ControllerForm::responsibilities;
  for (const auto& sc : m.system_constraints) {
    EXPECT_EQ(verify::verify(m, stpa::AssumptionSet::original(m), sc.id).status,
              verify::verify(r, stpa::AssumptionSet::original(r), sc.id).status);
  }
  EXPECT_EQ(verify::verify(r, with(r, "Road", "(WT -> MV) & !(MV -> WT)"), "SC-3").status, Status::refuted);
}
