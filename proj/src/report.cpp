#include "lossprobe/report.hpp"

#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "text_util.hpp"

namespace lossprobe::report {

using json = nlohmann::ordered_json;

namespace {

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

json witness_json(const WitnessEntry& w) {
  json params = json::array();
  for (const auto& [path, value] : w.params) params.push_back({{"path", path}, {"value", value}});
  return {{"params", params},
          {"window", {w.window_start, w.window_end}},
          {"margin", w.margin},
          {"trace_file", w.trace_file}};
}

WitnessEntry witness_from(const json& j) {
  WitnessEntry w;
  for (const auto& p : j.at("params")) w.params.emplace_back(p.at("path").get<std::string>(), p.at("value").get<double>());
  w.window_start = j.at("window").at(0).get<double>();
  w.window_end = j.at("window").at(1).get<double>();
  w.margin = j.at("margin").get<double>();
  w.trace_file = j.at("trace_file").get<std::string>();
  return w;
}

}  // namespace

std::string to_json(const CombinedReport& r) {
  json j;
  j["model"] = r.model;
  j["losses"] = json::array();
  for (const auto& l : r.losses) j["losses"].push_back({{"id", l.id}, {"text", l.text}});
  j["hazards"] = json::array();
  for (const auto& h : r.hazards) j["hazards"].push_back({{"id", h.id}, {"text", h.text}, {"losses", h.losses}});
  j["system_constraints"] = json::array();
  for (const auto& c : r.constraints) {
    j["system_constraints"].push_back(
        {{"id", c.id}, {"formula", c.formula}, {"text", c.text}, {"hazards", c.hazards}});
  }
  j["warnings"] = r.warnings;
  j["verdicts"] = json::array();
  for (const auto& v : r.verdicts) {
    j["verdicts"].push_back({{"target", v.target},
                             {"status", v.status},
                             {"answer_sets", v.answer_sets},
                             {"counterexamples", v.counterexamples},
                             {"argument", v.argument}});
  }
  j["weakenings"] = json::array();
  for (const auto& w : r.weakenings) {
    j["weakenings"].push_back({{"target", w.target},
                               {"slot", w.slot},
                               {"domain", w.domain},
                               {"kind", w.kind},
                               {"original", w.original},
                               {"replacement", w.replacement},
                               {"status", w.status},
                               {"counterexample", optional_json(w.counterexample)}});
  }
  j["scenarios"] = json::array();
  for (const auto& s : r.scenarios) {
    j["scenarios"].push_back({{"id", s.id},
                              {"literals", s.literals},
                              {"violated_sc", s.violated_sc},
                              {"source_slot", s.source_slot},
                              {"source_kind", s.source_kind},
                              {"hazards", s.hazards}});
  }
  j["falsifications"] = json::array();
  for (const auto& f : r.falsifications) {
    json boundary = json::array();
    for (const auto& b : f.boundary) {
      boundary.push_back({{"axis", b.axis},
                          {"critical", optional_json(b.critical)},
                          {"violating_value", b.violating_value},
                          {"safe_value", b.safe_value},
                          {"evaluations", b.evaluations}});
    }
    j["falsifications"].push_back({{"scenario", f.scenario},
                                   {"status", f.status},
                                   {"note", f.note},
                                   {"evaluations", f.evaluations},
                                   {"best_margin", optional_json(f.best_margin)},
                                   {"witness", f.witness ? witness_json(*f.witness) : json(nullptr)},
                                   {"boundary", boundary},
                                   {"log", f.log}});
  }
  j["provenance"] = {{"tool", r.provenance.tool},
                     {"version", r.provenance.version},
                     {"seed", r.provenance.seed},
                     {"budget", r.provenance.budget},
                     {"timestamp", optional_json(r.provenance.timestamp)}};
  return j.dump(2) + "\n";
}

CombinedReport from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    CombinedReport r;
    r.model = j.at("model").get<std::string>();
    for (const auto& l : j.at("losses")) r.losses.push_back({l.at("id"), l.at("text")});
    for (const auto& h : j.at("hazards")) {
      r.hazards.push_back({h.at("id"), h.at("text"), h.at("losses").get<std::vector<std::string>>()});
    }
    for (const auto& c : j.at("system_constraints")) {
      r.constraints.push_back(
          {c.at("id"), c.at("formula"), c.at("text"), c.at("hazards").get<std::vector<std::string>>()});
    }
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& v : j.at("verdicts")) {
      r.verdicts.push_back({v.at("target"), v.at("status"), v.at("answer_sets").get<std::size_t>(),
                            v.at("counterexamples").get<std::vector<std::string>>(),
                            v.at("argument").get<std::vector<std::string>>()});
    }
    for (const auto& w : j.at("weakenings")) {
      r.weakenings.push_back({w.at("target"), w.at("slot"), w.at("domain"), w.at("kind"), w.at("original"),
                              w.at("replacement"), w.at("status"), optional_from<std::string>(w.at("counterexample"))});
    }
    for (const auto& s : j.at("scenarios")) {
      r.scenarios.push_back({s.at("id"), s.at("literals"), s.at("violated_sc"), s.at("source_slot"),
                             s.at("source_kind"), s.at("hazards").get<std::vector<std::string>>()});
    }
    for (const auto& f : j.at("falsifications")) {
      FalsificationEntry e;
      e.scenario = f.at("scenario").get<std::string>();
      e.status = f.at("status").get<std::string>();
      e.note = f.at("note").get<std::string>();
      e.evaluations = f.at("evaluations").get<std::size_t>();
      e.best_margin = optional_from<double>(f.at("best_margin"));
      if (!f.at("witness").is_null()) e.witness = witness_from(f.at("witness"));
      for (const auto& b : f.at("boundary")) {
        e.boundary.push_back({b.at("axis"), optional_from<double>(b.at("critical")), b.at("violating_value"),
                              b.at("safe_value"), b.at("evaluations").get<std::size_t>()});
      }
      e.log = f.at("log").get<std::vector<std::string>>();
      r.falsifications.push_back(std::move(e));
    }
    const auto& p = j.at("provenance");
    r.provenance.tool = p.at("tool").get<std::string>();
    r.provenance.version = p.at("version").get<std::string>();
    r.provenance.seed = p.at("seed").get<std::uint64_t>();
    r.provenance.budget = p.at("budget").get<std::size_t>();
    r.provenance.timestamp = optional_from<std::int64_t>(p.at("timestamp"));
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
}

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep = ", ") {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::string to_text(const CombinedReport& r) {
  using text::format_number;
  std::ostringstream out;
  out << "model: " << r.model << "\n\nlosses:\n";
  for (const auto& l : r.losses) out << "  " << l.id << ": " << l.text << "\n";
  out << "\nhazards:\n";
  for (const auto& h : r.hazards) out << "  " << h.id << " [" << join(h.losses) << "]: " << h.text << "\n";
  out << "\nsystem constraints:\n";
  for (const auto& c : r.constraints) {
    out << "  " << c.id << " [" << join(c.hazards) << "]: " << c.formula;
    if (!c.text.empty()) out << "  -- " << c.text;
    out << "\n";
  }
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";

  out << "\nverdicts:\n";
  for (const auto& v : r.verdicts) {
    out << v.target << ": " << upper(v.status) << "\n";
    for (const auto& c : v.counterexamples) out << "  counterexample: " << c << "\n";
  }

  out << "\nweakenings:\n";
  for (const auto& w : r.weakenings) {
    out << "  " << w.target << " " << w.slot << " " << w.kind << ": " << w.replacement << " [" << upper(w.status);
    if (w.counterexample) out << ": " << *w.counterexample;
    out << "]";
    out << "\n";
  }

  out << "\nscenarios:\n";
  if (r.scenarios.empty()) out << "no loss scenarios found\n";
  for (const auto& s : r.scenarios) {
    out << s.id << " violates " << s.violated_sc << " via " << s.source_slot << " " << s.source_kind << ", hazards "
        << join(s.hazards) << "\n";
    out << "scenario: " << s.literals << "\n";
  }

  out << "\nwitnesses:\n";
  if (r.falsifications.empty()) out << "no falsification runs\n";
  for (const auto& f : r.falsifications) {
    out << f.scenario << ": " << f.status;
    if (f.note.empty()) {
      out << " after " << f.evaluations << (f.evaluations == 1 ? " evaluation" : " evaluations");
    } else {
      out << " (" << f.note << ")";
    }
    out << "\n";
    if (f.witness) {
      const auto& w = *f.witness;
      out << "  margin " << format_number(w.margin) << ", window [" << format_number(w.window_start) << ", "
          << format_number(w.window_end) << "] s, trace " << w.trace_file << "\n";
      for (const auto& [path, value] : w.params) out << "  " << path << " = " << format_number(value) << "\n";
    } else if (f.best_margin) {
      out << "  best margin " << format_number(*f.best_margin) << "\n";
    }
    for (const auto& b : f.boundary) {
      out << "  boundary " << b.axis << ": ";
      if (b.critical) {
        out << format_number(*b.critical) << " (violating " << format_number(b.violating_value) << ", safe "
            << format_number(b.safe_value) << ")\n";
      } else {
        out << "axis-insensitive\n";
      }
    }
    for (const auto& l : f.log) out << "  " << l << "\n";
  }
  return out.str();
}

VerdictEntry verdict_entry(std::string target, const verify::Verdict& v) {
  VerdictEntry e;
  e.target = std::move(target);
  e.status = std::string(verify::to_string(v.status));
  e.answer_sets = v.answer_set_count;
  for (const auto& c : v.counterexamples) e.counterexamples.push_back(verify::format_conjunction(c.literals));
  e.argument = v.argument_trace;
  return e;
}

WeakeningEntry weakening_entry(std::string target, const verify::WeakeningResult& r) {
  WeakeningEntry e;
  e.target = std::move(target);
  e.slot = r.weakening.slot;
  e.domain = r.weakening.domain;
  e.kind = std::string(verify::to_string(r.weakening.kind));
  e.original = to_string(r.weakening.original);
  e.replacement = to_string(r.weakening.replacement);
  e.status = std::string(verify::to_string(r.verdict.status));
  if (!r.verdict.counterexamples.empty()) {
    e.counterexample = verify::format_conjunction(r.verdict.counterexamples.front().literals);
  }
  return e;
}

ScenarioEntry scenario_entry(const verify::AbstractLossScenario& s) {
  return {s.id, verify::format_conjunction(s.literals), s.violated_sc, s.source.slot,
          std::string(verify::to_string(s.source.kind)), s.hazards};
}

FalsificationEntry falsification_entry(std::string scenario, const falsify::FalsificationResult& r,
                                       const ParameterSpace& space) {
  FalsificationEntry e;
  e.status = std::string(falsify::to_string(r.status));
  e.evaluations = r.evaluations;
  if (std::isfinite(r.best.margin)) e.best_margin = r.best.margin;
  if (r.witness) {
    WitnessEntry w;
    for (std::size_t i = 0; i < space.axes.size(); ++i) w.params.emplace_back(space.axes[i].path, r.witness->point[i]);
    w.window_start = r.witness->window.start;
    w.window_end = r.witness->window.end;
    w.margin = r.witness->margin;
    w.trace_file = scenario + "_witness.csv";
    e.witness = std::move(w);
  }
  for (const auto& b : r.boundary) {
    e.boundary.push_back({b.axis, b.critical, b.violating_value, b.safe_value, b.evaluations});
  }
  e.log = r.log;
  e.scenario = std::move(scenario);
  return e;
}

std::optional<std::int64_t> source_date_epoch() {
  const char* env = std::getenv("SOURCE_DATE_EPOCH");
  if (!env) return std::nullopt;
  char* end = nullptr;
  const long long v = std::strtoll(env, &end, 10);
  if (end == env || *end != '\0') return std::nullopt;
  return static_cast<std::int64_t>(v);
}

PipelineOutput run_pipeline(const stpa::SafetyModel& model, const sim::SimConfig& sim, const PipelineOptions& options) {
  PipelineOutput out;
  auto& r = out.report;
  r.model = model.name;
  for (const auto& l : model.losses) r.losses.push_back({l.id, l.text});
  for (const auto& h : model.hazards) r.hazards.push_back({h.id, h.text, h.losses});
  for (const auto& c : model.system_constraints) r.constraints.push_back({c.id, to_string(c.formula), c.text, c.hazards});
  r.warnings = model.warnings;

  const auto original = stpa::AssumptionSet::original(model);
  for (const auto& c : model.system_constraints) r.verdicts.push_back(verdict_entry(c.id, verify::verify(model, original, c.id)));

  std::vector<std::string> targets = options.targets;
  if (targets.empty()) {
    for (const auto& c : model.system_constraints) targets.push_back(c.id);
  }
  std::set<std::vector<PropLiteral>> seen;
  std::vector<verify::AbstractLossScenario> scenarios;
  for (const auto& target : targets) {
    const auto results = verify::weaken_assumptions(model, target);
    for (const auto& w : results) r.weakenings.push_back(weakening_entry(target, w));
    for (auto& s : verify::extract_scenarios(results, model, target)) {
      if (!seen.insert(s.literals).second) continue;
      s.id = "LS-" + std::to_string(scenarios.size() + 1);
      scenarios.push_back(std::move(s));
    }
  }
  for (const auto& s : scenarios) r.scenarios.push_back(scenario_entry(s));

  r.provenance.seed = model.space.seed;
  r.provenance.budget = options.budget;
  r.provenance.timestamp = source_date_epoch();

  for (const auto& s : scenarios) {
    std::vector<std::string> missing;
    for (const auto& l : s.literals) {
      if (!model.bridge.find(l.id)) missing.push_back(l.id);
    }
    if (!missing.empty() || model.space.axes.empty()) {
      FalsificationEntry e;
      e.scenario = s.id;
      e.status = "skipped";
      e.note = missing.empty() ? "no parameter space" : "no bridge entry for " + join(missing);
      r.falsifications.push_back(std::move(e));
      continue;
    }
    const falsify::Falsifier f(s.literals, model.bridge, sim.params, sim.script, model.space, sim.dt);
    auto result = f.falsify(options.budget, options.threads);
    if (result.status == falsify::SearchStatus::found) {
      for (const auto& axis : model.space.axes) {
        if (axis.tolerance) result.boundary.push_back(f.boundary_refine(result, axis.path, *axis.tolerance));
      }
    }
    auto entry = falsification_entry(s.id, result, model.space);
    if (result.witness) out.witness_traces.emplace(entry.witness->trace_file, result.witness->trace);
    r.falsifications.push_back(std::move(entry));
  }
  return out;
}

}  // namespace lossprobe::report
