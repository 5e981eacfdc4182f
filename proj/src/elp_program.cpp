#include "lossprobe/elp.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <sstream>

namespace lossprobe::elp {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                         what),
      line_(line),
      column_(column) {}

// LiteralSet

bool LiteralSet::empty() const noexcept {
  return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

std::size_t LiteralSet::size() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool LiteralSet::contradictory() const noexcept {
  constexpr std::uint64_t kEven = 0x5555555555555555ULL;
  for (auto w : words_) {
    if ((w & kEven) & ((w >> 1) & kEven)) return true;
  }
  return false;
}

bool LiteralSet::subset_of(const LiteralSet& other) const noexcept {
  for (std::size_t i = 0; i < kWords; ++i) {
    if (words_[i] & ~other.words_[i]) return false;
  }
  return true;
}

std::vector<Literal> LiteralSet::literals() const {
  std::vector<Literal> out;
  for (std::size_t i = 0; i < kWords; ++i) {
    auto w = words_[i];
    while (w) {
      auto bit = static_cast<std::size_t>(std::countr_zero(w));
      out.push_back(Literal::from_index(i * 64 + bit));
      w &= w - 1;
    }
  }
  return out;
}

LiteralSet& LiteralSet::operator|=(const LiteralSet& other) noexcept {
  for (std::size_t i = 0; i < kWords; ++i) words_[i] |= other.words_[i];
  return *this;
}

std::strong_ordering operator<=>(const LiteralSet& a, const LiteralSet& b) noexcept {
  for (std::size_t i = LiteralSet::kWords; i-- > 0;) {
    if (a.words_[i] != b.words_[i]) return a.words_[i] <=> b.words_[i];
  }
  return std::strong_ordering::equal;
}

// Program

bool is_atom_name(std::string_view name) noexcept {
  if (name.empty() || !(name[0] >= 'a' && name[0] <= 'z')) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

namespace {

std::string lowered(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

AtomId Program::intern(std::string_view name) {
  if (auto it = index_.find(name); it != index_.end()) return it->second;
  if (!is_atom_name(name)) throw ProgramError("invalid atom name '" + std::string(name) + "'");
  if (name == "not") throw ProgramError("'not' is reserved and cannot name an atom");
  const auto folded = lowered(name);
  for (const auto& existing : atoms_) {
    if (lowered(existing) == folded) {
      throw ProgramError("atom '" + std::string(name) + "' differs only in case from '" + existing + "'");
    }
  }
  if (atoms_.size() >= kMaxAtoms) {
    throw LimitError("program exceeds " + std::to_string(kMaxLiterals) + " literals");
  }
  const auto id = static_cast<AtomId>(atoms_.size());
  atoms_.emplace_back(name);
  index_.emplace(std::string(name), id);
  return id;
}

std::optional<AtomId> Program::find(std::string_view name) const {
  if (auto it = index_.find(name); it != index_.end()) return it->second;
  return std::nullopt;
}

void Program::add_clause(Clause clause) { clauses_.push_back(std::move(clause)); }

void Program::add_choice(Literal literal) { choices_.push_back({literal, clauses_.size()}); }

std::vector<AtomId> Program::choice_atoms() const {
  std::vector<AtomId> out;
  for (const auto& c : choices_) {
    if (std::find(out.begin(), out.end(), c.literal.atom) == out.end()) out.push_back(c.literal.atom);
  }
  return out;
}

bool Program::is_choice_atom(AtomId atom) const {
  return std::any_of(choices_.begin(), choices_.end(),
                     [atom](const ChoiceDecl& c) { return c.literal.atom == atom; });
}

bool Program::has_naf() const noexcept {
  return std::any_of(clauses_.begin(), clauses_.end(), [](const Clause& c) { return !c.naf_body.empty(); });
}

std::string Program::to_string(Literal l) const { return (l.negated ? "-" : "") + name(l.atom); }

void Program::validate() const {
  auto check_atom = [&](Literal l) {
    if (l.atom >= atoms_.size()) throw ProgramError("literal references unknown atom id " + std::to_string(l.atom));
  };
  for (const auto& c : choices_) check_atom(c.literal);
  for (const auto& clause : clauses_) {
    check_atom(clause.head);
    for (auto l : clause.positive_body) check_atom(l);
    for (auto l : clause.naf_body) check_atom(l);
    for (auto l : clause.positive_body) {
      if (std::find(clause.naf_body.begin(), clause.naf_body.end(), l) != clause.naf_body.end()) {
        throw ProgramError("literal '" + to_string(l) + "' appears both positively and under 'not' in a clause for '" +
                           to_string(clause.head) + "'");
      }
    }
    if (!permit_choice_heads_ && is_choice_atom(clause.head.atom) && !clause.is_fact()) {
      throw ProgramError("choice atom '" + name(clause.head.atom) +
                         "' is defined by a rule; add '#permit choice_heads.' to allow this");
    }
  }
}

// Parser

namespace {

enum class Tok { ident, neg, naf, arrow, comma, dot, directive, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

class Lexer {
public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_space();
    const auto line = line_, col = col_;
    if (pos_ >= text_.size()) return {Tok::end, "", line, col};
    const char c = text_[pos_];
    if (c == '.') return advance(1, Tok::dot, line, col);
    if (c == ',') return advance(1, Tok::comma, line, col);
    if (c == '-') return advance(1, Tok::neg, line, col);
    if (c == ':') {
      if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') return advance(2, Tok::arrow, line, col);
      throw ParseError(line, col, "expected ':-'");
    }
    if (c == '#') {
      std::size_t end = pos_ + 1;
      while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) ++end;
      return advance(end - pos_, Tok::directive, line, col);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) ++end;
      auto tok = advance(end - pos_, Tok::ident, line, col);
      if (tok.text == "not") tok.kind = Tok::naf;
      return tok;
    }
    throw ParseError(line, col, std::string("unexpected character '") + c + "'");
  }

private:
  Token advance(std::size_t n, Tok kind, std::size_t line, std::size_t col) {
    Token t{kind, std::string(text_.substr(pos_, n)), line, col};
    pos_ += n;
    col_ += n;
    return t;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
        ++col_;
      } else if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
public:
  explicit Parser(std::string_view text) : lex_(text) { tok_ = lex_.next(); }

  Program run() {
    while (tok_.kind != Tok::end) statement();
    try {
      program_.validate();
    } catch (const ProgramError& e) {
      throw ParseError(tok_.line, tok_.column, e.what());
    }
    return std::move(program_);
  }

private:
  void statement() {
    const auto start = tok_;
    if (tok_.kind == Tok::directive) {
      if (tok_.text == "#choice") {
        shift();
        program_.add_choice(literal());
        expect(Tok::dot, "'.' after #choice literal");
      } else if (tok_.text == "#permit") {
        shift();
        if (tok_.kind != Tok::ident || tok_.text != "choice_heads") fail("expected 'choice_heads' after #permit");
        shift();
        expect(Tok::dot, "'.' after #permit directive");
        program_.permit_choice_heads();
      } else {
        fail("unknown directive '" + tok_.text + "'");
      }
      return;
    }
    if (tok_.kind == Tok::arrow) fail("clause has an empty head");
    Clause clause;
    clause.head = literal();
    if (tok_.kind == Tok::arrow) {
      shift();
      if (tok_.kind != Tok::dot) {
        body_literal(clause);
        while (tok_.kind == Tok::comma) {
          shift();
          body_literal(clause);
        }
      }
    }
    expect(Tok::dot, "'.' at end of clause");
    for (auto l : clause.positive_body) {
      if (std::find(clause.naf_body.begin(), clause.naf_body.end(), l) != clause.naf_body.end()) {
        throw ParseError(start.line, start.column,
                         "literal '" + program_.to_string(l) + "' appears both positively and under 'not'");
      }
    }
    program_.add_clause(std::move(clause));
  }

  void body_literal(Clause& clause) {
    if (tok_.kind == Tok::naf) {
      shift();
      clause.naf_body.push_back(literal());
    } else {
      clause.positive_body.push_back(literal());
    }
  }

  Literal literal() {
    bool negated = false;
    if (tok_.kind == Tok::neg) {
      negated = true;
      shift();
    }
    if (tok_.kind != Tok::ident) fail(tok_.kind == Tok::naf ? "'not' is reserved" : "expected an atom");
    const auto at = tok_;
    shift();
    try {
      return {program_.intern(at.text), negated};
    } catch (const ProgramError& e) {
      throw ParseError(at.line, at.column, e.what());
    } catch (const LimitError&) {
      throw;
    }
  }

  void expect(Tok kind, const std::string& what) {
    if (tok_.kind != kind) fail("expected " + what);
    shift();
  }

  [[noreturn]] void fail(const std::string& what) { throw ParseError(tok_.line, tok_.column, what); }

  void shift() { tok_ = lex_.next(); }

  Lexer lex_;
  Token tok_;
  Program program_;
};

}  // namespace

Program parse_program(std::string_view text) { return Parser(text).run(); }

std::string print_clause(const Program& program, const Clause& clause) {
  std::string out = program.to_string(clause.head);
  if (!clause.is_fact()) {
    out += " :- ";
    bool first = true;
    for (auto l : clause.positive_body) {
      if (!first) out += ", ";
      out += program.to_string(l);
      first = false;
    }
    for (auto l : clause.naf_body) {
      if (!first) out += ", ";
      out += "not " + program.to_string(l);
      first = false;
    }
  }
  out += ".";
  return out;
}

std::string print_program(const Program& program) {
  std::ostringstream out;
  if (program.choice_heads_permitted()) out << "#permit choice_heads.\n";
  const auto& choices = program.choices();
  const auto& clauses = program.clauses();
  std::size_t next_choice = 0;
  for (std::size_t i = 0; i <= clauses.size(); ++i) {
    while (next_choice < choices.size() && choices[next_choice].position <= i) {
      out << "#choice " << program.to_string(choices[next_choice].literal) << ".\n";
      ++next_choice;
    }
    if (i < clauses.size()) out << print_clause(program, clauses[i]) << "\n";
  }
  return out.str();
}

std::string format_answer_set(const Program& program, const LiteralSet& set) {
  std::string out = "{";
  bool first = true;
  for (auto l : set.literals()) {
    if (!first) out += ", ";
    out += program.to_string(l);
    first = false;
  }
  return out + "}";
}

}  // namespace lossprobe::elp
