#include <algorithm>
#include <map>
#include <set>

#include "lossprobe/stpa.hpp"
#include "text_util.hpp"

namespace lossprobe::stpa {

ModelError::ModelError(ModelErrorKind kind, std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), kind_(kind), line_(line) {}

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::environment: return "environment";
    case Role::plant: return "plant";
    case Role::feedback: return "feedback";
    case Role::actuation: return "actuation";
    case Role::process_model: return "process_model";
  }
  return "?";
}

std::string_view to_string(UcaColumn c) noexcept {
  switch (c) {
    case UcaColumn::not_applied: return "not_applied";
    case UcaColumn::applied: return "applied";
    case UcaColumn::wrong_timing: return "wrong_timing";
    case UcaColumn::wrong_duration: return "wrong_duration";
  }
  return "?";
}

std::string_view to_string(AssumptionTag t) noexcept {
  switch (t) {
    case AssumptionTag::original: return "original";
    case AssumptionTag::weakened: return "weakened";
    case AssumptionTag::replaced: return "replaced";
  }
  return "?";
}

namespace {

template <class T>
const T* find_by_id(const std::vector<T>& items, std::string_view id) {
  auto it = std::find_if(items.begin(), items.end(), [&](const T& x) { return x.id == id; });
  return it == items.end() ? nullptr : &*it;
}

}  // namespace

const PropositionDecl* SafetyModel::proposition(std::string_view id) const { return find_by_id(propositions, id); }
const SystemConstraint* SafetyModel::system_constraint(std::string_view id) const {
  return find_by_id(system_constraints, id);
}
const Hazard* SafetyModel::hazard(std::string_view id) const { return find_by_id(hazards, id); }
const Domain* SafetyModel::domain(std::string_view id) const { return find_by_id(domains, id); }

const PropositionDecl* SafetyModel::proposition_by_atom(std::string_view atom) const {
  auto it = std::find_if(propositions.begin(), propositions.end(), [&](const auto& p) { return p.atom == atom; });
  return it == propositions.end() ? nullptr : &*it;
}

AssumptionSet AssumptionSet::original(const SafetyModel& model) {
  AssumptionSet set;
  for (const auto& d : model.domains) {
    for (std::size_t i = 0; i < d.assumptions.size(); ++i) {
      AssumptionSlot slot;
      slot.id = d.assumptions.size() == 1 ? d.id : d.id + "." + std::to_string(i + 1);
      slot.domain = d.id;
      slot.formula = d.assumptions[i];
      set.slots.push_back(std::move(slot));
    }
  }
  return set;
}

const AssumptionSlot* AssumptionSet::find(std::string_view slot_id) const { return find_by_id(slots, slot_id); }

void AssumptionSet::replace(std::string_view slot_id, Formula formula, AssumptionTag tag, std::string note) {
  auto it = std::find_if(slots.begin(), slots.end(), [&](const auto& s) { return s.id == slot_id; });
  if (it == slots.end()) throw std::out_of_range("no assumption slot '" + std::string(slot_id) + "'");
  it->formula = std::move(formula);
  it->tag = tag;
  it->note = std::move(note);
}

namespace {

// `ID word (Parent) [R1, R2] {f} {g}: text`, split into its pieces.
struct Entry {
  std::size_t line = 0;
  std::vector<std::string> words;
  std::optional<std::vector<std::string>> refs;
  std::vector<std::pair<std::string, std::size_t>> formulas;  // source text, line
  std::string parent;
  bool has_parent = false;
  std::string text;
};

[[noreturn]] void syntax(std::size_t line, const std::string& what) {
  throw ModelError(ModelErrorKind::syntax, line, what);
}

std::vector<std::string> comma_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto part : text::split(s, ',')) {
    auto t = text::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

Entry parse_entry(std::string_view s, std::size_t line) {
  Entry e;
  e.line = line;
  std::size_t i = 0;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) e.words.push_back(std::move(word));
    word.clear();
  };
  auto group = [&](char open, char close) {
    const auto end = s.find(close, i + 1);
    if (end == std::string_view::npos) syntax(line, std::string("unterminated '") + open + "'");
    auto inner = s.substr(i + 1, end - i - 1);
    i = end + 1;
    return inner;
  };
  bool colon = false;
  while (i < s.size()) {
    const char c = s[i];
    if (c == ':') {
      flush();
      colon = true;
      ++i;
      break;
    }
    if (c == ' ' || c == '\t') {
      flush();
      ++i;
    } else if (c == '[') {
      flush();
      if (e.refs) syntax(line, "more than one reference list");
      e.refs = comma_list(group('[', ']'));
    } else if (c == '{') {
      flush();
      e.formulas.emplace_back(std::string(group('{', '}')), line);
    } else if (c == '(') {
      flush();
      if (e.has_parent) syntax(line, "more than one parent domain");
      e.parent = std::string(text::trim(group('(', ')')));
      e.has_parent = true;
    } else if (c == ']' || c == '}' || c == ')') {
      syntax(line, std::string("unexpected '") + c + "'");
    } else {
      word.push_back(c);
      ++i;
    }
  }
  flush();
  if (!colon) syntax(line, "expected ':' after the entry head");
  if (e.words.empty()) syntax(line, "entry has no id");
  e.text = std::string(text::trim(s.substr(i)));
  return e;
}

class ModelReader {
public:
  SafetyModel read(std::string_view source);

private:
  void entry(std::string_view section, std::string_view body, std::size_t line);
  void option(std::string_view body, std::size_t line);
  Formula formula(const std::pair<std::string, std::size_t>& src);
  void claim_id(const std::string& id, std::size_t line);
  void check();
  void require_refs(const Entry& e, std::string_view what);
  void expect_words(const Entry& e, std::size_t n, std::string_view shape);

  SafetyModel m_;
  std::set<std::string, std::less<>> ids_;
  std::set<std::string, std::less<>> domain_ids_;
  // Line of each artefact, parallel to the model vectors.
  std::vector<std::size_t> hazard_lines_, sc_lines_, r_lines_, ca_lines_, cc_lines_, domain_lines_, phen_lines_,
      bridge_lines_;
  std::vector<std::vector<std::pair<std::string, std::size_t>>> sc_src_, r_src_, cc_src_, domain_src_;
  struct UcaLine {
    std::string action;
    UcaColumn column;
    UcaEntry entry;
    std::size_t line;
  };
  std::vector<UcaLine> uca_;
};

void ModelReader::claim_id(const std::string& id, std::size_t line) {
  if (!ids_.insert(id).second) throw ModelError(ModelErrorKind::duplicate_id, line, "duplicate id '" + id + "'");
}

void ModelReader::require_refs(const Entry& e, std::string_view what) {
  if (!e.refs || e.refs->empty()) {
    throw ModelError(ModelErrorKind::traceability, e.line,
                     e.words[0] + " must reference at least one " + std::string(what));
  }
}

void ModelReader::expect_words(const Entry& e, std::size_t n, std::string_view shape) {
  if (e.words.size() != n) syntax(e.line, "expected '" + std::string(shape) + "'");
}

void ModelReader::option(std::string_view body, std::size_t line) {
  const auto eq = body.find('=');
  if (eq == std::string_view::npos) syntax(line, "expected 'key = value'");
  const auto key = text::trim(body.substr(0, eq));
  const auto value = text::trim(body.substr(eq + 1));
  if (key == "name") {
    m_.name = std::string(value);
  } else if (key == "controller") {
    if (value == "control_constraints") {
      m_.controller = ControllerForm::control_constraints;
    } else if (value == "responsibilities") {
      m_.controller = ControllerForm::responsibilities;
    } else {
      syntax(line, "controller must be control_constraints or responsibilities");
    }
  } else {
    syntax(line, "unknown option '" + std::string(key) + "'");
  }
}

void ModelReader::entry(std::string_view section, std::string_view body, std::size_t line) {
  if (section == "options") return option(body, line);
  if (section == "bridge") {
    const auto before = m_.bridge.predicates.size();
    try {
      parse_bridge_line(body, line, m_.bridge, m_.space);
    } catch (const ConfigError& e) {
      throw ModelError(ModelErrorKind::syntax, line, e.what());
    }
    if (m_.bridge.predicates.size() > before) bridge_lines_.push_back(line);
    return;
  }

  const Entry e = parse_entry(body, line);
  const auto& id = e.words[0];

  if (section == "losses") {
    expect_words(e, 1, "L-n: text");
    claim_id(id, line);
    m_.losses.push_back({id, e.text});
  } else if (section == "hazards") {
    expect_words(e, 1, "H-n [L-n, ...]: text");
    claim_id(id, line);
    require_refs(e, "loss");
    m_.hazards.push_back({id, e.text, *e.refs});
    hazard_lines_.push_back(line);
  } else if (section == "propositions") {
    expect_words(e, 2, "ID role: text");
    static const std::map<std::string, Role, std::less<>> roles{{"environment", Role::environment},
                                                                {"plant", Role::plant},
                                                                {"feedback", Role::feedback},
                                                                {"actuation", Role::actuation},
                                                                {"process_model", Role::process_model}};
    auto role = roles.find(e.words[1]);
    if (role == roles.end()) syntax(line, "unknown role '" + e.words[1] + "'");
    if (m_.proposition(id)) throw ModelError(ModelErrorKind::duplicate_id, line, "duplicate proposition '" + id + "'");
    const auto atom = atom_name(id);
    if (!elp::is_atom_name(atom)) syntax(line, "'" + id + "' is not a valid proposition id");
    if (atom == kViolationAtom || atom == kHoldsAtom || atom == kFalsumAtom) {
      syntax(line, "proposition id '" + id + "' is reserved");
    }
    if (m_.proposition_by_atom(atom)) {
      throw ModelError(ModelErrorKind::duplicate_id, line, "proposition '" + id + "' lowers to an atom already in use");
    }
    m_.propositions.push_back({id, atom, e.text, role->second});
  } else if (section == "constraints") {
    expect_words(e, 1, "SC-n [H-n, ...] {formula}: text");
    claim_id(id, line);
    require_refs(e, "hazard");
    if (e.formulas.size() != 1) syntax(line, "a system-level constraint takes exactly one {formula}");
    m_.system_constraints.push_back({id, Formula{}, e.text, *e.refs});
    sc_src_.push_back(e.formulas);
    sc_lines_.push_back(line);
  } else if (section == "responsibilities") {
    expect_words(e, 1, "R-n [SC-n] {formula}...: text");
    claim_id(id, line);
    require_refs(e, "system-level constraint");
    if (e.refs->size() != 1) syntax(line, "a responsibility references exactly one constraint");
    m_.responsibilities.push_back({id, e.text, e.refs->front(), {}});
    r_src_.push_back(e.formulas);
    r_lines_.push_back(line);
  } else if (section == "actions") {
    expect_words(e, 1, "CA-n [R-n]: text");
    claim_id(id, line);
    require_refs(e, "responsibility");
    if (e.refs->size() != 1) syntax(line, "a control action references exactly one responsibility");
    m_.control_actions.push_back({id, e.text, e.refs->front()});
    ca_lines_.push_back(line);
  } else if (section == "control_constraints") {
    expect_words(e, 1, "CC-n [CA-n, ...] {formula}: text");
    claim_id(id, line);
    require_refs(e, "control action");
    if (e.formulas.size() != 1) syntax(line, "a control constraint takes exactly one {formula}");
    m_.control_constraints.push_back({id, Formula{}, e.text, *e.refs});
    cc_src_.push_back(e.formulas);
    cc_lines_.push_back(line);
  } else if (section == "uca") {
    expect_words(e, 2, "CA-n column [H-n, ...]: text");
    static const std::map<std::string, UcaColumn, std::less<>> columns{
        {"not_applied", UcaColumn::not_applied},
        {"applied", UcaColumn::applied},
        {"wrong_timing", UcaColumn::wrong_timing},
        {"wrong_duration", UcaColumn::wrong_duration}};
    auto col = columns.find(e.words[1]);
    if (col == columns.end()) syntax(line, "unknown UCA column '" + e.words[1] + "'");
    UcaEntry u;
    u.text = e.text;
    if (e.text == "N/A") {
      if (e.refs && !e.refs->empty()) syntax(line, "an N/A entry takes no hazards");
    } else {
      require_refs(e, "hazard");
      u.applicable = true;
      u.hazards = *e.refs;
    }
    uca_.push_back({id, col->second, std::move(u), line});
  } else if (section == "domains") {
    if (e.words.size() > 2 || (e.words.size() == 2 && e.words[1] != "machine")) {
      syntax(line, "expected 'Name [machine] [(Parent)] {assumption}...: text'");
    }
    if (!domain_ids_.insert(id).second) {
      throw ModelError(ModelErrorKind::duplicate_id, line, "duplicate domain '" + id + "'");
    }
    Domain d;
    d.id = id;
    d.text = e.text;
    d.parent = e.parent;
    d.machine = e.words.size() == 2;
    m_.domains.push_back(std::move(d));
    domain_src_.push_back(e.formulas);
    domain_lines_.push_back(line);
  } else if (section == "phenomena") {
    expect_words(e, 2, "DomainA DomainB: P, Q");
    m_.shared_phenomena.push_back({e.words[0], e.words[1], comma_list(e.text)});
    phen_lines_.push_back(line);
  } else {
    syntax(line, "unknown section '" + std::string(section) + "'");
  }
}

Formula ModelReader::formula(const std::pair<std::string, std::size_t>& src) {
  Formula f;
  try {
    f = parse_formula(src.first);
  } catch (const FormulaError& err) {
    throw ModelError(ModelErrorKind::malformed_formula, src.second, "{" + src.first + "}: " + err.what());
  }
  if (f.biconditional_depth() > kMaxBiconditionalDepth) {
    throw ModelError(ModelErrorKind::malformed_formula, src.second,
                     "{" + src.first + "}: biconditionals nested too deeply");
  }
  for (const auto& p : f.propositions()) {
    if (!m_.proposition(p)) {
      throw ModelError(ModelErrorKind::undeclared_proposition, src.second, "undeclared proposition '" + p + "'");
    }
  }
  return f;
}

void ModelReader::check() {
  auto dangling = [](std::size_t line, const std::string& from, const std::string& to) {
    throw ModelError(ModelErrorKind::dangling_reference, line, from + " references missing '" + to + "'");
  };
  auto exists = [](const auto& items, const std::string& id) { return find_by_id(items, id) != nullptr; };

  for (std::size_t i = 0; i < m_.hazards.size(); ++i) {
    for (const auto& l : m_.hazards[i].losses) {
      if (!exists(m_.losses, l)) dangling(hazard_lines_[i], m_.hazards[i].id, l);
    }
  }
  for (std::size_t i = 0; i < m_.system_constraints.size(); ++i) {
    auto& sc = m_.system_constraints[i];
    for (const auto& h : sc.hazards) {
      if (!exists(m_.hazards, h)) dangling(sc_lines_[i], sc.id, h);
    }
    sc.formula = formula(sc_src_[i].front());
  }
  for (std::size_t i = 0; i < m_.responsibilities.size(); ++i) {
    auto& r = m_.responsibilities[i];
    if (!exists(m_.system_constraints, r.constraint)) dangling(r_lines_[i], r.id, r.constraint);
    for (const auto& src : r_src_[i]) r.control_logic.push_back(formula(src));
  }
  for (std::size_t i = 0; i < m_.control_actions.size(); ++i) {
    const auto& ca = m_.control_actions[i];
    if (!exists(m_.responsibilities, ca.responsibility)) dangling(ca_lines_[i], ca.id, ca.responsibility);
  }
  for (std::size_t i = 0; i < m_.control_constraints.size(); ++i) {
    auto& cc = m_.control_constraints[i];
    for (const auto& a : cc.actions) {
      if (!exists(m_.control_actions, a)) dangling(cc_lines_[i], cc.id, a);
    }
    cc.formula = formula(cc_src_[i].front());
  }

  // UCA rows follow the order of the actions section.
  for (const auto& u : uca_) {
    if (!exists(m_.control_actions, u.action)) dangling(u.line, "UCA entry", u.action);
    for (const auto& h : u.entry.hazards) {
      if (!exists(m_.hazards, h)) dangling(u.line, u.action + " " + std::string(to_string(u.column)), h);
    }
  }
  for (const auto& ca : m_.control_actions) {
    UcaRow row;
    row.action = ca.id;
    std::size_t last_line = 0;
    for (const auto& u : uca_) {
      if (u.action != ca.id) continue;
      auto& slot = row.entries[static_cast<std::size_t>(u.column)];
      if (slot) {
        throw ModelError(ModelErrorKind::duplicate_id, u.line,
                         "duplicate UCA entry " + ca.id + " " + std::string(to_string(u.column)));
      }
      slot = u.entry;
      last_line = u.line;
    }
    for (std::size_t c = 0; c < row.entries.size(); ++c) {
      if (!row.entries[c]) {
        throw ModelError(ModelErrorKind::traceability, last_line,
                         "UCA table has no " + std::string(to_string(kUcaColumns[c])) + " entry for " + ca.id);
      }
    }
    m_.uca_table.push_back(std::move(row));
  }

  for (std::size_t i = 0; i < m_.domains.size(); ++i) {
    auto& d = m_.domains[i];
    if (!d.parent.empty() && !domain_ids_.contains(d.parent)) dangling(domain_lines_[i], d.id, d.parent);
    for (const auto& src : domain_src_[i]) d.assumptions.push_back(formula(src));
  }
  for (std::size_t i = 0; i < m_.shared_phenomena.size(); ++i) {
    const auto& sp = m_.shared_phenomena[i];
    for (const auto* d : {&sp.first, &sp.second}) {
      if (!domain_ids_.contains(*d)) dangling(phen_lines_[i], "phenomenon", *d);
    }
    for (const auto& p : sp.propositions) {
      if (!m_.proposition(p)) {
        throw ModelError(ModelErrorKind::undeclared_proposition, phen_lines_[i], "undeclared proposition '" + p + "'");
      }
    }
  }
  for (std::size_t i = 0; i < m_.bridge.predicates.size(); ++i) {
    const auto& p = m_.bridge.predicates[i].proposition;
    if (!m_.proposition(p)) {
      throw ModelError(ModelErrorKind::undeclared_proposition, bridge_lines_[i], "bridge maps undeclared proposition '" + p + "'");
    }
  }
  try {
    if (!m_.space.axes.empty()) m_.space.validate();
  } catch (const ConfigError& e) {
    throw ModelError(ModelErrorKind::syntax, e.line(), e.what());
  }

  if (m_.losses.empty()) m_.warnings.push_back("no-hazard-coverage: the model declares no losses");
  for (const auto& l : m_.losses) {
    const bool covered = std::any_of(m_.hazards.begin(), m_.hazards.end(), [&](const Hazard& h) {
      return std::find(h.losses.begin(), h.losses.end(), l.id) != h.losses.end();
    });
    if (!covered) m_.warnings.push_back("no hazard leads to " + l.id);
  }
  for (const auto& h : m_.hazards) {
    const bool constrained = std::any_of(m_.system_constraints.begin(), m_.system_constraints.end(), [&](const auto& sc) {
      return std::find(sc.hazards.begin(), sc.hazards.end(), h.id) != sc.hazards.end();
    });
    if (!constrained) m_.warnings.push_back("no system-level constraint addresses " + h.id);
  }
}

SafetyModel ModelReader::read(std::string_view source) {
  std::string section;
  std::size_t line_no = 0;
  for (auto raw : text::lines(source)) {
    ++line_no;
    const auto line = text::trim(text::strip_comment(raw, "%"));
    if (line.empty()) continue;
    const bool header = line.back() == ':' && line.find_first_of(" \t[{(") == std::string_view::npos;
    if (header) {
      section = std::string(line.substr(0, line.size() - 1));
      static const std::set<std::string, std::less<>> known{
          "options", "losses",      "hazards", "propositions", "constraints", "responsibilities",
          "actions", "control_constraints", "uca", "domains", "phenomena", "bridge"};
      if (!known.contains(section)) syntax(line_no, "unknown section '" + section + "'");
      continue;
    }
    if (section.empty()) syntax(line_no, "entry outside any section");
    entry(section, line, line_no);
  }
  check();
  return std::move(m_);
}

}  // namespace

SafetyModel parse_model(std::string_view text) { return ModelReader{}.read(text); }

}  // namespace lossprobe::stpa
