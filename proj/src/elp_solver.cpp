#include "lossprobe/elp.hpp"

#include <algorithm>

namespace lossprobe::elp {

namespace {

// Branch-and-check over the "guess" literals: every literal under `not`
// somewhere in the program, plus both literals of each choice atom. The
// reduct depends only on which guess literals are in the candidate, so each
// total guess determines one least model M, and the guess is stable iff M is
// consistent and agrees with it.
//
// For a partial guess, two least models bracket every completion:
//   lower: clauses whose naf bodies are entirely decided-out, plus decided choices
//   upper: clauses with no decided-in naf literal, plus both sides of open choices
// which gives pruning (decided-in must be in upper, decided-out must not be in
// lower) and propagation (forced in / forced out).

enum class Status : std::uint8_t { open, in, out };

class Solver {
public:
  explicit Solver(const Program& program) : program_(program) {
    const auto atoms = program.atom_count();
    if (atoms * 2 > kMaxLiterals) throw LimitError("program exceeds solver literal limit");
    literal_count_ = atoms * 2;
    watches_.resize(literal_count_);
    is_guess_.assign(literal_count_, false);

    const auto& clauses = program.clauses();
    for (std::size_t i = 0; i < clauses.size(); ++i) {
      for (auto l : clauses[i].positive_body) {
        auto& w = watches_[l.index()];
        if (w.empty() || w.back() != i) w.push_back(i);
      }
      for (auto l : clauses[i].naf_body) is_guess_[l.index()] = true;
    }
    choice_atoms_ = program.choice_atoms();
    is_choice_.assign(atoms, false);
    for (auto a : choice_atoms_) {
      is_choice_[a] = true;
      is_guess_[Literal{a, false}.index()] = true;
      is_guess_[Literal{a, true}.index()] = true;
    }
    for (std::size_t i = 0; i < literal_count_; ++i) {
      if (is_guess_[i] && !is_choice_[i / 2]) naf_literals_.push_back(i);
    }
  }

  AnswerSetResult run() {
    AnswerSetResult result;
    std::vector<Status> status(literal_count_, Status::open);
    search(status, Mode::answer_sets, result);
    std::sort(result.answer_sets.begin(), result.answer_sets.end());
    if (result.answer_sets.empty()) {
      std::vector<Status> fresh(literal_count_, Status::open);
      result.inconsistent = search(fresh, Mode::contradiction, result);
    }
    return result;
  }

private:
  enum class Mode { answer_sets, contradiction };

  // Returns true when (in contradiction mode) a contradictory fixpoint candidate exists.
  bool search(std::vector<Status>& status, Mode mode, AnswerSetResult& out) {
    LiteralSet lower, upper;
    if (!propagate(status, mode, lower, upper)) return false;
    if (mode == Mode::contradiction && lower.contradictory() && in_literals_within(status, lower)) return true;

    const auto branch = next_open(status);
    if (!branch) {
      // lower == upper here: every clause's naf status is decided.
      if (mode == Mode::answer_sets) {
        if (!lower.contradictory()) out.answer_sets.push_back(lower);
        return false;
      }
      return lower.contradictory() && in_literals_within(status, lower);
    }

    const auto& [index, is_choice] = *branch;
    for (int value = 0; value < 2; ++value) {
      auto next = status;
      if (is_choice) {
        const std::size_t pos = index, neg = index + 1;
        next[pos] = value == 0 ? Status::in : Status::out;
        next[neg] = value == 0 ? Status::out : Status::in;
      } else {
        next[index] = value == 0 ? Status::in : Status::out;
      }
      if (search(next, mode, out) && mode == Mode::contradiction) return true;
    }
    return false;
  }

  bool in_literals_within(const std::vector<Status>& status, const LiteralSet& set) const {
    for (std::size_t i = 0; i < literal_count_; ++i) {
      if (status[i] == Status::in && !set.contains(Literal::from_index(i))) return false;
    }
    return true;
  }

  // Fixpoint of bound computation and forced decisions. False on conflict.
  bool propagate(std::vector<Status>& status, Mode mode, LiteralSet& lower, LiteralSet& upper) const {
    for (;;) {
      lower = closure(status, /*upper=*/false);
      upper = closure(status, /*upper=*/true);
      bool changed = false;
      for (std::size_t i = 0; i < literal_count_; ++i) {
        if (!is_guess_[i]) continue;
        const auto lit = Literal::from_index(i);
        if (status[i] == Status::in && !upper.contains(lit)) return false;
        if (mode == Mode::answer_sets && status[i] == Status::out && lower.contains(lit)) return false;
      }
      if (mode == Mode::answer_sets && lower.contradictory()) return false;
      if (mode == Mode::contradiction) {
        for (std::size_t i = 0; i + 1 < literal_count_; i += 2) {
          if (status[i] == Status::in && status[i + 1] == Status::in) return false;
        }
      }
      for (std::size_t i = 0; i < literal_count_; ++i) {
        if (!is_guess_[i] || status[i] != Status::open) continue;
        const auto lit = Literal::from_index(i);
        if (!upper.contains(lit)) {
          if (is_choice_[i / 2]) {
            status[i] = Status::out;
            status[i ^ 1] = Status::in;
          } else {
            status[i] = Status::out;
          }
          changed = true;
        } else if (mode == Mode::answer_sets && lower.contains(lit)) {
          status[i] = Status::in;
          if (is_choice_[i / 2]) status[i ^ 1] = Status::out;
          changed = true;
        }
      }
      if (!changed) return true;
    }
  }

  LiteralSet closure(const std::vector<Status>& status, bool upper) const {
    const auto& clauses = program_.clauses();
    std::vector<std::size_t> missing(clauses.size(), 0);
    std::vector<std::size_t> queue;
    LiteralSet model;
    auto derive = [&](Literal l) {
      if (!model.contains(l)) {
        model.insert(l);
        queue.push_back(l.index());
      }
    };
    for (std::size_t i = 0; i < clauses.size(); ++i) {
      const auto& clause = clauses[i];
      bool active = true;
      for (auto l : clause.naf_body) {
        const auto s = status[l.index()];
        if (upper ? s == Status::in : s != Status::out) {
          active = false;
          break;
        }
      }
      if (!active) {
        missing[i] = SIZE_MAX;
        continue;
      }
      missing[i] = clause.positive_body.size();
    }
    for (auto atom : choice_atoms_) {
      const Literal pos{atom, false}, neg{atom, true};
      const auto sp = status[pos.index()];
      if (sp == Status::in) {
        derive(pos);
      } else if (sp == Status::out) {
        derive(neg);
      } else if (upper) {
        derive(pos);
        derive(neg);
      }
    }
    for (std::size_t i = 0; i < clauses.size(); ++i) {
      if (missing[i] == 0) derive(clauses[i].head);
    }
    while (!queue.empty()) {
      const auto lit = queue.back();
      queue.pop_back();
      for (auto ci : watches_[lit]) {
        if (missing[ci] == SIZE_MAX || missing[ci] == 0) continue;
        // A clause may list the same literal twice; count each occurrence.
        for (auto l : clauses[ci].positive_body) {
          if (l.index() == lit) --missing[ci];
        }
        if (missing[ci] == 0) derive(clauses[ci].head);
      }
    }
    return model;
  }

  std::optional<std::pair<std::size_t, bool>> next_open(const std::vector<Status>& status) const {
    for (auto atom : choice_atoms_) {
      const auto i = Literal{atom, false}.index();
      if (status[i] == Status::open) return std::pair{i, true};
    }
    for (auto i : naf_literals_) {
      if (status[i] == Status::open) return std::pair{i, false};
    }
    return std::nullopt;
  }

  const Program& program_;
  std::size_t literal_count_ = 0;
  std::vector<std::vector<std::size_t>> watches_;
  std::vector<bool> is_guess_;
  std::vector<bool> is_choice_;
  std::vector<AtomId> choice_atoms_;
  std::vector<std::size_t> naf_literals_;
};

}  // namespace

AnswerSetResult answer_sets(const Program& program) {
  program.validate();
  return Solver(program).run();
}

}  // namespace lossprobe::elp
