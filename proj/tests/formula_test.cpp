#include "lossprobe/formula.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace lossprobe;

namespace {

std::vector<std::string> lowered(std::string_view text, Polarity polarity) {
  elp::Program p;
  std::vector<std::string> out;
  for (const auto& c : formula_to_clauses(parse_formula(text), polarity, p)) out.push_back(elp::print_clause(p, c));
  return out;
}

using Strings = std::vector<std::string>;

}  // namespace

TEST(ParseFormula, Precedence) {
  EXPECT_EQ(parse_formula("A & B | C"), Formula::disjunction(Formula::conjunction(Formula::prop("A"), Formula::prop("B")),
                                                            Formula::prop("C")));
  EXPECT_EQ(parse_formula("A -> B -> C"),
            Formula::implication(Formula::prop("A"), Formula::implication(Formula::prop("B"), Formula::prop("C"))));
  EXPECT_EQ(parse_formula("!A <-> B"), Formula::biconditional(Formula::negation(Formula::prop("A")), Formula::prop("B")));
  EXPECT_EQ(parse_formula("(WT -> MV) & !(MV -> WT)").kind(), Formula::Kind::conjunction);
}

TEST(ParseFormula, Constants) {
  EXPECT_EQ(parse_formula("true"), Formula::constant(true));
  EXPECT_EQ(parse_formula("!false"), Formula::negation(Formula::constant(false)));
}

TEST(ParseFormula, Errors) {
  EXPECT_THROW(parse_formula(""), FormulaError);
  EXPECT_THROW(parse_formula("A &"), FormulaError);
  EXPECT_THROW(parse_formula("(A"), FormulaError);
  EXPECT_THROW(parse_formula("A B"), FormulaError);
  EXPECT_THROW(parse_formula("A => B"), FormulaError);
  try {
    parse_formula("A & $");
    FAIL();
  } catch (const FormulaError& e) {
    EXPECT_EQ(e.column(), 5U);
  }
}

TEST(Formula, PrintParseRoundTrip) {
  for (auto text : {"MV <-> DL", "!MV -> !DL", "(WT -> MV) & !(MV -> WT)", "A | B & C", "(A | B) & C",
                    "A -> (B -> C)", "(A -> B) -> C", "!(A <-> B)", "true", "false"}) {
    const auto f = parse_formula(text);
    EXPECT_EQ(parse_formula(to_string(f)), f) << text;
  }
  EXPECT_EQ(to_string(parse_formula("((A)) & (B | C)")), "A & (B | C)");
}

TEST(Formula, PropositionsInFirstOccurrenceOrder) {
  EXPECT_EQ(parse_formula("(WT -> MV) & !(MV -> WT) | DL").propositions(), (Strings{"WT", "MV", "DL"}));
}

TEST(Formula, ClassicalChecks) {
  const auto iff = parse_formula("WT <-> MV");
  const auto weak = parse_formula("(WT -> MV) & !(MV -> WT)");
  EXPECT_FALSE(entails_classically(weak, iff));
  EXPECT_FALSE(entails_classically(iff, weak));
  EXPECT_TRUE(entails_classically(iff, parse_formula("WT -> MV")));
  EXPECT_TRUE(equivalent_classically(weak, parse_formula("MV & !WT")));
  EXPECT_TRUE(entails_classically(parse_formula("MV -> !WT"), parse_formula("MV -> !WT | DL")));
}

TEST(FormulaToClauses, ViolateBiconditional) {
  EXPECT_EQ(lowered("MV <-> DL", Polarity::violate), (Strings{"violation :- mv, -dl.", "violation :- -mv, dl."}));
}

TEST(FormulaToClauses, DefineBiconditional) {
  const auto got = lowered("WT <-> MV", Polarity::define);
  EXPECT_EQ(std::set<std::string>(got.begin(), got.end()),
            (std::set<std::string>{"mv :- wt.", "wt :- mv.", "-mv :- -wt.", "-wt :- -mv."}));
  EXPECT_EQ(got.size(), 4U);
}

TEST(FormulaToClauses, DefineImplicationWithNegatedHead) {
  EXPECT_EQ(lowered("MV -> !WT", Polarity::define), (Strings{"-wt :- mv.", "-mv :- wt."}));
  EXPECT_EQ(lowered("A -> B", Polarity::define), (Strings{"b :- a.", "-a :- -b."}));
}

TEST(FormulaToClauses, UnitsAndConstants) {
  EXPECT_EQ(lowered("MV & !WT", Polarity::define), (Strings{"mv.", "-wt."}));
  EXPECT_TRUE(lowered("true", Polarity::define).empty());
  EXPECT_EQ(lowered("false", Polarity::define), (Strings{"falsum.", "-falsum."}));
  EXPECT_EQ(lowered("false", Polarity::violate), (Strings{"violation."}));
  EXPECT_TRUE(lowered("A | !A", Polarity::violate).empty());
}

TEST(FormulaToClauses, AtomNames) {
  EXPECT_EQ(atom_name("MV_pm"), "mv_pm");
  EXPECT_EQ(lowered("WP -> MV_pm", Polarity::define), (Strings{"mv_pm :- wp.", "-wp :- -mv_pm."}));
}

TEST(FormulaToClauses, NestedBiconditionalRejected) {
  elp::Program p;
  EXPECT_NO_THROW(formula_to_clauses(parse_formula("(A <-> B) <-> C"), Polarity::define, p));
  EXPECT_THROW(formula_to_clauses(parse_formula("((A <-> B) <-> C) <-> D"), Polarity::define, p), FormulaError);
}

namespace {

const std::vector<std::string> kProps{"A", "B", "C", "D", "E", "F"};

Formula random_formula(std::mt19937_64& rng, int depth, int iff_budget, std::size_t nprops) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 7);
  const int k = pick(rng);
  auto prop = [&] { return Formula::prop(kProps[std::uniform_int_distribution<std::size_t>(0, nprops - 1)(rng)]); };
  switch (k) {
    case 0:
    case 1: return prop();
    case 2: return Formula::negation(random_formula(rng, depth - 1, iff_budget, nprops));
    case 3:
      return Formula::conjunction(random_formula(rng, depth - 1, iff_budget, nprops),
                                  random_formula(rng, depth - 1, iff_budget, nprops));
    case 4:
      return Formula::disjunction(random_formula(rng, depth - 1, iff_budget, nprops),
                                  random_formula(rng, depth - 1, iff_budget, nprops));
    case 5:
    case 6:
      return Formula::implication(random_formula(rng, depth - 1, iff_budget, nprops),
                                  random_formula(rng, depth - 1, iff_budget, nprops));
    default:
      if (iff_budget == 0) return prop();
      return Formula::biconditional(random_formula(rng, depth - 1, iff_budget - 1, nprops),
                                    random_formula(rng, depth - 1, iff_budget - 1, nprops));
  }
}

// Every assignment over `props`, as the set of true/false literal strings.
std::set<std::set<std::string>> classical_models(const Formula& f, const std::vector<std::string>& props,
                                                 bool want) {
  std::set<std::set<std::string>> out;
  for (std::uint64_t bits = 0; bits < (1ULL << props.size()); ++bits) {
    std::map<std::string, bool, std::less<>> a;
    std::set<std::string> lits;
    for (std::size_t i = 0; i < props.size(); ++i) {
      a[props[i]] = (bits >> i) & 1U;
      lits.insert(((bits >> i) & 1U ? "" : "-") + atom_name(props[i]));
    }
    if (f.evaluate(a) == want) out.insert(lits);
  }
  return out;
}

std::set<std::string> project(const elp::Program& p, const elp::LiteralSet& s, const std::vector<std::string>& props) {
  std::set<std::string> out;
  for (auto l : s.literals()) {
    const auto& name = p.name(l.atom);
    for (const auto& id : props) {
      if (atom_name(id) == name) out.insert(p.to_string(l));
    }
  }
  return out;
}

}  // namespace

// Choices for every proposition plus define(f) have exactly the classical
// models of f as answer sets.
TEST(FormulaProperty, LoweringSoundness) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t nprops = 1 + trial % 6;
    const auto f = random_formula(rng, 4, 2, nprops);
    const auto props = f.propositions();
    elp::Program p;
    p.permit_choice_heads();
    for (const auto& id : props) p.add_choice(p.literal(atom_name(id)));
    for (auto& c : formula_to_clauses(f, Polarity::define, p)) p.add_clause(std::move(c));

    std::set<std::set<std::string>> got;
    for (const auto& s : elp::answer_sets(p).answer_sets) got.insert(project(p, s, props));
    EXPECT_EQ(got, classical_models(f, props, true)) << to_string(f);
  }
}

// violation is derived in exactly the assignments that falsify f.
TEST(FormulaProperty, ViolationDuality) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t nprops = 1 + trial % 6;
    const auto f = random_formula(rng, 4, 2, nprops);
    const auto props = f.propositions();
    elp::Program p;
    p.permit_choice_heads();
    for (const auto& id : props) p.add_choice(p.literal(atom_name(id)));
    for (auto& c : formula_to_clauses(f, Polarity::violate, p)) p.add_clause(std::move(c));
    const auto violation = p.literal(kViolationAtom);

    const auto result = elp::answer_sets(p);
    ASSERT_EQ(result.answer_sets.size(), 1ULL << props.size()) << to_string(f);
    std::set<std::set<std::string>> violating;
    for (const auto& s : result.answer_sets) {
      if (s.contains(violation)) violating.insert(project(p, s, props));
    }
    EXPECT_EQ(violating, classical_models(f, props, false)) << to_string(f);
  }
}

TEST(FormulaProperty, CnfIsEquivalent) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto f = random_formula(rng, 4, 2, 4);
    const auto props = f.propositions();
    for (std::uint64_t bits = 0; bits < (1ULL << props.size()); ++bits) {
      std::map<std::string, bool, std::less<>> a;
      for (std::size_t i = 0; i < props.size(); ++i) a[props[i]] = (bits >> i) & 1U;
      bool cnf_value = true;
      for (const auto& clause : to_cnf(f)) {
        bool any = false;
        for (const auto& l : clause) any = any || (a.at(l.id) != l.negated);
        cnf_value = cnf_value && any;
      }
      EXPECT_EQ(cnf_value, f.evaluate(a)) << to_string(f);
    }
  }
}
