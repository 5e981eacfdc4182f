#include "lossprobe/elp.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace lossprobe::elp;

namespace {

// Answer sets as sorted sets of printed literals, for readable assertions.
std::vector<std::set<std::string>> named(const Program& p, const std::vector<LiteralSet>& sets) {
  std::vector<std::set<std::string>> out;
  for (const auto& s : sets) {
    std::set<std::string> lits;
    for (auto l : s.literals()) lits.insert(p.to_string(l));
    out.push_back(std::move(lits));
  }
  return out;
}

using Named = std::vector<std::set<std::string>>;

LiteralSet set_of(Program& p, std::initializer_list<const char*> lits) {
  LiteralSet s;
  for (std::string_view l : lits) {
    const bool neg = l.front() == '-';
    if (neg) l.remove_prefix(1);
    s.insert(p.literal(l, neg));
  }
  return s;
}

}  // namespace

TEST(ParseProgram, SingleRule) {
  auto p = parse_program("dl :- ds.");
  ASSERT_EQ(p.clauses().size(), 1U);
  const auto& c = p.clauses()[0];
  EXPECT_EQ(p.to_string(c.head), "dl");
  ASSERT_EQ(c.positive_body.size(), 1U);
  EXPECT_EQ(p.to_string(c.positive_body[0]), "ds");
  EXPECT_TRUE(c.naf_body.empty());
}

TEST(ParseProgram, ClassicallyNegatedBody) {
  auto p = parse_program("sc3 :- -violation.");
  const auto& c = p.clauses().at(0);
  ASSERT_EQ(c.positive_body.size(), 1U);
  EXPECT_TRUE(c.positive_body[0].negated);
  EXPECT_EQ(p.name(c.positive_body[0].atom), "violation");
}

TEST(ParseProgram, NafOverClassicalNegation) {
  auto p = parse_program("p :- q, not -r.");
  const auto& c = p.clauses().at(0);
  ASSERT_EQ(c.positive_body.size(), 1U);
  EXPECT_EQ(p.to_string(c.positive_body[0]), "q");
  ASSERT_EQ(c.naf_body.size(), 1U);
  EXPECT_EQ(p.to_string(c.naf_body[0]), "-r");
}

TEST(ParseProgram, CommentsChoicesAndCrLf) {
  auto p = parse_program("% header\r\n#choice mv.\r\nwt :- mv. % trailing\r\n-wt :- -mv.\r\n");
  EXPECT_EQ(p.clauses().size(), 2U);
  ASSERT_EQ(p.choice_atoms().size(), 1U);
  EXPECT_EQ(p.name(p.choice_atoms()[0]), "mv");
}

TEST(ParseProgram, SyntaxErrorCarriesLocation) {
  try {
    parse_program("p :- q.\nr :- s t.\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2U);
    EXPECT_EQ(e.column(), 8U);
  }
}

TEST(ParseProgram, EmptyHeadRejected) { EXPECT_THROW(parse_program(":- a."), ParseError); }

TEST(ParseProgram, CaseConflictRejected) {
  try {
    parse_program("mv.\nwt :- mV.\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2U);
    EXPECT_NE(std::string(e.what()).find("case"), std::string::npos);
  }
}

TEST(ParseProgram, LiteralInBothBodiesRejected) { EXPECT_THROW(parse_program("p :- q, not q."), ParseError); }

TEST(ParseProgram, ChoiceHeadsNeedPermission) {
  EXPECT_THROW(parse_program("#choice mv. mv :- wt."), ParseError);
  EXPECT_NO_THROW(parse_program("#permit choice_heads. #choice mv. mv :- wt."));
}

TEST(ParseProgram, UnknownDirective) { EXPECT_THROW(parse_program("#show p."), ParseError); }

TEST(Reduct, NafSurvivesWhenAbsent) {
  auto p = parse_program("p :- not q.");
  auto r = reduct(p, set_of(p, {"p"}));
  ASSERT_EQ(r.clauses().size(), 1U);
  EXPECT_EQ(print_clause(r, r.clauses()[0]), "p.");
}

TEST(Reduct, ClauseDeletedWhenNafBlocked) {
  auto p = parse_program("p :- not q.");
  EXPECT_TRUE(reduct(p, set_of(p, {"q"})).clauses().empty());
}

TEST(Reduct, NafFreeProgramIsItsOwnReduct) {
  auto p = parse_program("dl :- ds. ds :- wp.");
  auto r = reduct(p, set_of(p, {"wp", "ds", "dl"}));
  EXPECT_EQ(r, p);
}

TEST(Reduct, InconsistentCandidateRejected) {
  auto p = parse_program("p :- not q.");
  EXPECT_THROW(reduct(p, set_of(p, {"p", "-p"})), ProgramError);
}

TEST(Reduct, ChoicesBecomeFacts) {
  auto p = parse_program("#choice mv. wt :- mv.");
  auto decided = reduct(p, set_of(p, {"mv"}));
  EXPECT_EQ(print_program(decided), "wt :- mv.\nmv.\n");
  // An undecided pair contributes both sides.
  auto open = reduct(p, LiteralSet{});
  EXPECT_EQ(print_program(open), "wt :- mv.\nmv.\n-mv.\n");
}

TEST(LeastModel, ForwardChaining) {
  auto p = parse_program("p. q :- p.");
  auto m = least_model(p);
  EXPECT_FALSE(m.contradictory);
  EXPECT_EQ(named(p, {m.literals}), (Named{{"p", "q"}}));
}

TEST(LeastModel, ComplementaryFactsFlagged) {
  auto p = parse_program("p. -p.");
  auto m = least_model(p);
  EXPECT_TRUE(m.contradictory);
  EXPECT_EQ(named(p, {m.literals}), (Named{{"p", "-p"}}));
}

TEST(LeastModel, OneStepClosure) {
  auto p = parse_program("mv :- wt. wt.");
  EXPECT_EQ(named(p, {least_model(p).literals}), (Named{{"wt", "mv"}}));
}

TEST(LeastModel, RejectsNaf) { EXPECT_THROW(least_model(parse_program("p :- not q.")), ProgramError); }

TEST(AnswerSets, SingleStableModel) {
  auto p = parse_program("p :- not q.");
  auto r = answer_sets(p);
  EXPECT_FALSE(r.inconsistent);
  EXPECT_EQ(named(p, r.answer_sets), (Named{{"p"}}));
}

TEST(AnswerSets, ChoicePairWithContrapositive) {
  auto p = parse_program("#choice mv. wt :- mv. -wt :- -mv.");
  const Named expected{{"mv", "wt"}, {"-mv", "-wt"}};
  // Oracle first: exhaustive enumeration fixes the expected value.
  EXPECT_EQ(named(p, oracle_answer_sets(p).answer_sets), expected);
  EXPECT_EQ(named(p, answer_sets(p).answer_sets), expected);
}

TEST(AnswerSets, ContradictoryFactsSetFlag) {
  auto p = parse_program("p. -p.");
  auto r = answer_sets(p);
  EXPECT_TRUE(r.answer_sets.empty());
  EXPECT_TRUE(r.inconsistent);
}

TEST(AnswerSets, NoStableModelIsNotInconsistency) {
  auto r = answer_sets(parse_program("p :- not p."));
  EXPECT_TRUE(r.answer_sets.empty());
  EXPECT_FALSE(r.inconsistent);
}

TEST(AnswerSets, EveryBranchContradictory) {
  auto p = parse_program("#choice a. p :- a. -p :- a. p :- -a. -p :- -a.");
  auto r = answer_sets(p);
  EXPECT_TRUE(r.answer_sets.empty());
  EXPECT_TRUE(r.inconsistent);
  EXPECT_TRUE(oracle_answer_sets(p).inconsistent);
}

TEST(AnswerSets, OneContradictoryBranchIsDiscarded) {
  auto p = parse_program("#choice a. p :- a. -p :- a.");
  auto r = answer_sets(p);
  EXPECT_FALSE(r.inconsistent);
  EXPECT_EQ(named(p, r.answer_sets), (Named{{"-a"}}));
}

TEST(AnswerSets, LiteralLimit) {
  Program p;
  for (std::size_t i = 0; i < kMaxAtoms; ++i) p.intern("a" + std::to_string(i));
  EXPECT_THROW(p.intern("overflow"), LimitError);
  // A 64-atom chain is comfortably inside the limit.
  std::string text = "#choice x0.";
  for (int i = 1; i < 64; ++i) text += " x" + std::to_string(i) + " :- x" + std::to_string(i - 1) + ".";
  auto big = parse_program(text);
  EXPECT_EQ(answer_sets(big).answer_sets.size(), 2U);
}

TEST(Oracle, EvenLoop) {
  auto p = parse_program("p :- not q. q :- not p.");
  EXPECT_EQ(named(p, oracle_answer_sets(p).answer_sets), (Named{{"p"}, {"q"}}));
  EXPECT_EQ(named(p, answer_sets(p).answer_sets), (Named{{"p"}, {"q"}}));
}

TEST(Oracle, EmptyProgram) {
  Program p;
  EXPECT_EQ(oracle_answer_sets(p).answer_sets.size(), 1U);
  EXPECT_TRUE(oracle_answer_sets(p).answer_sets[0].empty());
  EXPECT_EQ(answer_sets(p).answer_sets.size(), 1U);
}

TEST(Oracle, OddLoopHasNoFixpoint) {
  auto p = parse_program("p :- not p.");
  EXPECT_TRUE(oracle_answer_sets(p).answer_sets.empty());
}

TEST(Oracle, SizeLimit) {
  std::string text;
  for (int i = 0; i < 11; ++i) text += "a" + std::to_string(i) + ".";
  EXPECT_THROW(oracle_answer_sets(parse_program(text)), LimitError);
}

TEST(Entails, CautiousSingleModel) {
  auto p = parse_program("p :- not q.");
  EXPECT_TRUE(entails(p, "p", Entailment::cautious).holds);
}

TEST(Entails, BraveVersusCautious) {
  auto p = parse_program("#choice mv. wt :- mv. -wt :- -mv.");
  EXPECT_TRUE(entails(p, "wt", Entailment::brave).holds);
  EXPECT_FALSE(entails(p, "wt", Entailment::cautious).holds);
}

TEST(Entails, EmptyProgram) {
  Program p;
  EXPECT_FALSE(entails(p, "p", Entailment::cautious).holds);
  EXPECT_FALSE(entails(p, "p", Entailment::brave).holds);
}

TEST(Entails, InconsistentProgramEntailsNothing) {
  auto p = parse_program("p. -p.");
  for (auto mode : {Entailment::brave, Entailment::cautious}) {
    auto r = entails(p, "p", mode);
    EXPECT_FALSE(r.holds);
    EXPECT_TRUE(r.inconsistent);
  }
}

// Property tests over random programs.

namespace {

Program random_program(std::mt19937_64& rng, std::size_t max_atoms = 8, std::size_t max_clauses = 12) {
  std::uniform_int_distribution<std::size_t> n_atoms(1, max_atoms);
  const auto atoms = n_atoms(rng);
  Program p;
  for (std::size_t i = 0; i < atoms; ++i) p.intern("a" + std::to_string(i));
  std::uniform_int_distribution<std::size_t> pick_atom(0, atoms - 1);
  std::uniform_int_distribution<std::size_t> n_clauses(0, max_clauses);
  std::uniform_int_distribution<std::size_t> n_body(0, 3);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution rare(0.25);

  auto lit = [&] { return Literal{static_cast<AtomId>(pick_atom(rng)), rare(rng)}; };
  if (coin(rng)) {
    std::uniform_int_distribution<std::size_t> n_choices(1, 2);
    for (auto k = n_choices(rng); k > 0; --k) p.add_choice(lit());
  }
  p.permit_choice_heads();
  for (auto k = n_clauses(rng); k > 0; --k) {
    Clause c;
    c.head = lit();
    for (auto b = n_body(rng); b > 0; --b) {
      auto l = lit();
      if (coin(rng)) {
        if (std::find(c.positive_body.begin(), c.positive_body.end(), l) == c.positive_body.end()) {
          c.naf_body.push_back(l);
        }
      } else if (std::find(c.naf_body.begin(), c.naf_body.end(), l) == c.naf_body.end()) {
        c.positive_body.push_back(l);
      }
    }
    p.add_clause(std::move(c));
  }
  return p;
}

}  // namespace

TEST(AnswerSetProperties, MatchOracleStableAndConsistent) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = random_program(rng);
    const auto fast = answer_sets(p);
    const auto slow = oracle_answer_sets(p);
    ASSERT_EQ(fast.answer_sets, slow.answer_sets) << print_program(p);
    ASSERT_EQ(fast.inconsistent, slow.inconsistent) << print_program(p);
    for (const auto& s : fast.answer_sets) {
      EXPECT_FALSE(s.contradictory());
      const auto m = least_model(reduct(p, s));
      EXPECT_EQ(m.literals, s) << print_program(p);
    }
  }
}

TEST(AnswerSetProperties, NafFreeProgramsHaveTheirLeastModel) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto p = random_program(rng);
    Program positive;
    for (const auto& name : p.atoms()) positive.intern(name);
    for (const auto& c : p.clauses()) positive.add_clause({c.head, c.positive_body, {}});
    const auto m = least_model(positive);
    const auto r = answer_sets(positive);
    if (m.contradictory) {
      EXPECT_TRUE(r.answer_sets.empty());
      EXPECT_TRUE(r.inconsistent);
    } else {
      ASSERT_EQ(r.answer_sets.size(), 1U);
      EXPECT_EQ(r.answer_sets[0], m.literals);
    }
  }
}

TEST(AnswerSetProperties, PrintParseRoundTrip) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_program(rng);
    const auto text = print_program(p);
    const auto once = parse_program(text);
    const auto twice = parse_program(print_program(once));
    EXPECT_EQ(once, twice) << text;
    EXPECT_EQ(answer_sets(once).answer_sets, answer_sets(twice).answer_sets);
  }
}

TEST(AnswerSetProperties, DeterministicOrdering) {
  const std::string text = "#choice a. #choice b. c :- a, not d. d :- b, not c. -c :- -a.";
  const auto first = answer_sets(parse_program(text)).answer_sets;
  for (int i = 0; i < 5; ++i) EXPECT_EQ(answer_sets(parse_program(text)).answer_sets, first);
  EXPECT_TRUE(std::is_sorted(first.begin(), first.end()));
}
