#include "lossprobe/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "lossprobe/report.hpp"
#include "text_util.hpp"

namespace lossprobe::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string model_path;
  std::vector<std::string> targets;
  std::vector<std::string> assume;
  std::string anti;
  std::string scenario;
  std::string sim_config;
  std::string space_path;
  std::optional<std::uint64_t> seed;
  std::size_t budget = 200;
  std::string out_dir;
  std::string format = "text";
};

// Input problems that map to exit status 2, reported with their file.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content)) throw InputError(path.string() + ": cannot write file");
}

stpa::SafetyModel load_model(const RunConfig& c) {
  const auto text = read_file(c.model_path);
  try {
    return stpa::parse_model(text);
  } catch (const std::exception& e) {
    throw InputError(c.model_path + ": " + e.what());
  }
}

stpa::AssumptionSet assumptions_for(const stpa::SafetyModel& model, const RunConfig& c) {
  auto set = stpa::AssumptionSet::original(model);
  for (const auto& a : c.assume) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw InputError("--assume expects slot=formula, got '" + a + "'");
    const auto slot = std::string(text::trim(std::string_view(a).substr(0, eq)));
    try {
      set.replace(slot, parse_formula(a.substr(eq + 1)), stpa::AssumptionTag::replaced, "command line");
    } catch (const std::out_of_range&) {
      throw InputError("--assume: unknown assumption slot '" + slot + "'");
    } catch (const std::exception& e) {
      throw InputError("--assume " + slot + ": " + e.what());
    }
  }
  return set;
}

sim::SimConfig load_sim(const RunConfig& c) {
  if (c.sim_config.empty()) return {};
  const auto text = read_file(c.sim_config);
  try {
    return sim::parse_sim_config(text);
  } catch (const ConfigError& e) {
    throw InputError(c.sim_config + ":" + std::to_string(e.line()) + ": " + e.what());
  } catch (const std::exception& e) {
    throw InputError(c.sim_config + ": " + e.what());
  }
}

// Applies --space and --seed to the model's bridge and parameter space.
void apply_space(stpa::SafetyModel& model, const RunConfig& c) {
  if (!c.space_path.empty()) {
    Bridge bridge;
    ParameterSpace space;
    try {
      parse_bridge_config(read_file(c.space_path), bridge, space);
    } catch (const ConfigError& e) {
      throw InputError(c.space_path + ":" + std::to_string(e.line()) + ": " + e.what());
    }
    for (auto& p : bridge.predicates) {
      auto it = std::find_if(model.bridge.predicates.begin(), model.bridge.predicates.end(),
                             [&](const PredicateSpec& q) { return q.proposition == p.proposition; });
      if (it != model.bridge.predicates.end()) {
        *it = p;
      } else {
        model.bridge.predicates.push_back(p);
      }
    }
    if (!space.axes.empty()) model.space = space;
  }
  if (c.seed) model.space.seed = *c.seed;
}

void emit(const RunConfig& c, std::ostream& out, const std::string& stem, const std::string& body) {
  out << body;
  if (c.out_dir.empty()) return;
  fs::create_directories(c.out_dir);
  write_file(fs::path(c.out_dir) / (stem + (c.format == "json" ? ".json" : ".txt")), body);
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

std::string verdict_text(const std::string& target, const verify::Verdict& v) {
  std::ostringstream s;
  s << target << ": " << upper(verify::to_string(v.status)) << "\n";
  s << "answer sets: " << v.answer_set_count << "\n";
  if (!v.argument_trace.empty()) {
    s << "argument:\n";
    for (const auto& line : v.argument_trace) s << "  " << line << "\n";
  }
  for (const auto& ce : v.counterexamples) {
    s << "counterexample: " << verify::format_conjunction(ce.literals) << "\n";
    for (const auto& line : ce.trace) s << "  " << line << "\n";
  }
  return s.str();
}

report::CombinedReport summary(const stpa::SafetyModel& model) {
  report::CombinedReport r;
  r.model = model.name;
  for (const auto& l : model.losses) r.losses.push_back({l.id, l.text});
  for (const auto& h : model.hazards) r.hazards.push_back({h.id, h.text, h.losses});
  for (const auto& sc : model.system_constraints) {
    r.constraints.push_back({sc.id, to_string(sc.formula), sc.text, sc.hazards});
  }
  r.warnings = model.warnings;
  r.provenance.seed = model.space.seed;
  r.provenance.timestamp = report::source_date_epoch();
  return r;
}

int status_code(verify::Status s) { return s == verify::Status::proved ? kExitOk : kExitViolation; }

int cmd_verify(const RunConfig& c, std::ostream& out) {
  const auto model = load_model(c);
  const auto set = assumptions_for(model, c);
  if (c.targets.size() != 1) throw InputError("verify needs exactly one --sc");
  const auto v = verify::verify(model, set, c.targets.front());
  if (c.format == "json") {
    auto r = summary(model);
    r.verdicts.push_back(report::verdict_entry(c.targets.front(), v));
    emit(c, out, "verdict", report::to_json(r));
  } else {
    emit(c, out, "verdict", verdict_text(c.targets.front(), v));
  }
  return status_code(v.status);
}

int cmd_prove_anti(const RunConfig& c, std::ostream& out) {
  const auto model = load_model(c);
  const auto set = assumptions_for(model, c);
  Formula anti = Formula::constant(true);
  try {
    anti = parse_formula(c.anti);
  } catch (const std::exception& e) {
    throw InputError(std::string("--anti: ") + e.what());
  }
  const auto label = "anti(" + to_string(anti) + ")";
  const auto v = verify::prove_anti(model, anti, set);
  if (c.format == "json") {
    auto r = summary(model);
    r.verdicts.push_back(report::verdict_entry(label, v));
    emit(c, out, "anti_verdict", report::to_json(r));
  } else {
    emit(c, out, "anti_verdict", verdict_text(label, v));
  }
  return status_code(v.status);
}

int cmd_weaken(const RunConfig& c, std::ostream& out) {
  const auto model = load_model(c);
  if (c.targets.size() != 1) throw InputError("weaken needs exactly one --sc");
  const auto& target = c.targets.front();
  const auto results = verify::weaken_assumptions(model, target);
  const auto scenarios = verify::extract_scenarios(results, model, target);
  bool refuted = false;
  auto r = summary(model);
  for (const auto& w : results) {
    r.weakenings.push_back(report::weakening_entry(target, w));
    refuted = refuted || w.verdict.status != verify::Status::proved;
  }
  for (const auto& s : scenarios) r.scenarios.push_back(report::scenario_entry(s));
  if (c.format == "json") {
    emit(c, out, "weakenings", report::to_json(r));
  } else {
    std::ostringstream s;
    for (const auto& w : r.weakenings) {
      s << w.slot << " " << w.kind << ": " << w.replacement << " [" << upper(w.status);
      if (w.counterexample) s << ": " << *w.counterexample;
      s << "]";
      s << "\n";
    }
    if (r.scenarios.empty()) s << "no loss scenarios found\n";
    for (const auto& sc : r.scenarios) {
      s << sc.id << " from " << sc.source_slot << " " << sc.source_kind << ", hazards ";
      for (std::size_t i = 0; i < sc.hazards.size(); ++i) s << (i ? ", " : "") << sc.hazards[i];
      s << "\nscenario: " << sc.literals << "\n";
    }
    emit(c, out, "weakenings", s.str());
  }
  return refuted ? kExitViolation : kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const auto cfg = load_sim(c);
  sim::Trace trace;
  try {
    trace = sim::simulate(cfg.params, cfg.script, cfg.dt);
  } catch (const sim::SimulationError& e) {
    throw InputError(std::string("simulation aborted: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  std::ostringstream csv;
  sim::write_csv(csv, trace);
  out << csv.str();
  if (!c.out_dir.empty()) {
    fs::create_directories(c.out_dir);
    write_file(fs::path(c.out_dir) / "trace.csv", csv.str());
  }
  return kExitOk;
}

int cmd_falsify(const RunConfig& c, std::ostream& out) {
  auto model = load_model(c);
  apply_space(model, c);
  const auto cfg = load_sim(c);
  std::vector<PropLiteral> literals;
  for (auto part : text::split(c.scenario, '&')) {
    part = text::trim(part);
    if (part.empty()) continue;
    try {
      literals.push_back(verify::parse_literal(part));
    } catch (const std::exception& e) {
      throw InputError("--scenario: " + std::string(e.what()));
    }
  }
  if (literals.empty()) throw InputError("--scenario: no literals");
  if (model.space.axes.empty()) throw InputError("no parameter space: add axes to the model or pass --space");
  std::optional<falsify::Falsifier> f;
  try {
    f.emplace(literals, model.bridge, cfg.params, cfg.script, model.space, cfg.dt);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  auto result = f->falsify(c.budget);
  if (result.status == falsify::SearchStatus::found) {
    for (const auto& axis : model.space.axes) {
      if (axis.tolerance) result.boundary.push_back(f->boundary_refine(result, axis.path, *axis.tolerance));
    }
  }
  auto r = summary(model);
  r.provenance.budget = c.budget;
  r.scenarios.push_back({"scenario", verify::format_conjunction(literals), "", "", "", {}});
  r.falsifications.push_back(report::falsification_entry("scenario", result, model.space));
  if (c.format == "json") {
    emit(c, out, "falsification", report::to_json(r));
  } else {
    std::ostringstream s;
    s << "scenario: " << r.scenarios.front().literals << "\n";
    const auto text = report::to_text(r);
    s << text.substr(text.find("\nwitnesses:\n") + 1);
    emit(c, out, "falsification", s.str());
  }
  if (result.witness && !c.out_dir.empty()) {
    std::ostringstream csv;
    sim::write_csv(csv, result.witness->trace);
    write_file(fs::path(c.out_dir) / r.falsifications.front().witness->trace_file, csv.str());
  }
  return result.status == falsify::SearchStatus::found ? kExitViolation : kExitOk;
}

int cmd_report(const RunConfig& c, std::ostream& out) {
  auto model = load_model(c);
  apply_space(model, c);
  const auto cfg = load_sim(c);
  report::PipelineOptions options;
  options.targets = c.targets;
  options.budget = c.budget;
  for (const auto& t : c.targets) {
    if (!model.system_constraint(t)) throw InputError("unknown system constraint '" + t + "'");
  }
  report::PipelineOutput result;
  try {
    result = report::run_pipeline(model, cfg, options);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  emit(c, out, "report", c.format == "json" ? report::to_json(result.report) : report::to_text(result.report));
  if (!c.out_dir.empty()) {
    for (const auto& [file, trace] : result.witness_traces) {
      std::ostringstream csv;
      sim::write_csv(csv, trace);
      write_file(fs::path(c.out_dir) / file, csv.str());
    }
  }
  bool violation = false;
  for (const auto& v : result.report.verdicts) violation = violation || v.status != "proved";
  for (const auto& f : result.report.falsifications) violation = violation || f.status == "found";
  return violation ? kExitViolation : kExitOk;
}

int cmd_compile(const RunConfig& c, std::ostream& out) {
  const auto model = load_model(c);
  const auto set = assumptions_for(model, c);
  if (c.targets.size() != 1) throw InputError("compile needs exactly one --sc");
  out << elp::print_program(stpa::compile_to_elp(model, set, c.targets.front()));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Consistency checking and loss-scenario search for STPA safety models", "lossprobe"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(report::kToolVersion));

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", c.model_path, "Safety model (.stpa)")->required()->check(CLI::ExistingFile);
  };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--out", c.out_dir, "Directory for output files");
  };
  auto add_search = [&](CLI::App* sub) {
    sub->add_option("--sim-config", c.sim_config, "Vehicle and script config")->check(CLI::ExistingFile);
    sub->add_option("--space", c.space_path, "Bridge and parameter space config")->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "Sampling seed");
    sub->add_option("--budget", c.budget, "Simulations per scenario")->check(CLI::PositiveNumber);
  };
  auto add_assume = [&](CLI::App* sub) {
    sub->add_option("--assume", c.assume, "Replace an assumption: slot=formula");
  };

  auto* verify_cmd = app.add_subcommand("verify", "Check a system constraint against assumptions and controller");
  add_model(verify_cmd);
  verify_cmd->add_option("--sc", c.targets, "System constraint id")->required()->expected(1);
  add_assume(verify_cmd);
  add_format(verify_cmd);

  auto* weaken_cmd = app.add_subcommand("weaken", "Weaken each domain assumption and extract loss scenarios");
  add_model(weaken_cmd);
  weaken_cmd->add_option("--sc", c.targets, "System constraint id")->required()->expected(1);
  add_format(weaken_cmd);

  auto* anti_cmd = app.add_subcommand("prove-anti", "Prove an anti-constraint");
  add_model(anti_cmd);
  anti_cmd->add_option("--anti", c.anti, "Anti-constraint formula")->required();
  add_assume(anti_cmd);
  add_format(anti_cmd);

  auto* sim_cmd = app.add_subcommand("simulate", "Simulate the braking script and print the trace as CSV");
  sim_cmd->add_option("--sim-config", c.sim_config, "Vehicle and script config")->check(CLI::ExistingFile);
  sim_cmd->add_option("--out", c.out_dir, "Directory for trace.csv");

  auto* falsify_cmd = app.add_subcommand("falsify", "Search the parameter space for a trace realizing a scenario");
  add_model(falsify_cmd);
  falsify_cmd->add_option("--scenario", c.scenario, "Conjunction of literals, e.g. '!WT & MV'")->required();
  add_search(falsify_cmd);
  add_format(falsify_cmd);

  auto* report_cmd = app.add_subcommand("report", "Run the whole pipeline and write a combined report");
  add_model(report_cmd);
  report_cmd->add_option("--sc", c.targets, "System constraints to weaken against (default: all)");
  add_search(report_cmd);
  add_format(report_cmd);

  auto* compile_cmd = app.add_subcommand("compile", "Print the verification program for a system constraint");
  add_model(compile_cmd);
  compile_cmd->add_option("--sc", c.targets, "System constraint id")->required()->expected(1);
  add_assume(compile_cmd);

  std::vector<std::string> argv_store{"lossprobe"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << report::kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (verify_cmd->parsed()) return cmd_verify(c, out);
    if (weaken_cmd->parsed()) return cmd_weaken(c, out);
    if (anti_cmd->parsed()) return cmd_prove_anti(c, out);
    if (sim_cmd->parsed()) return cmd_simulate(c, out);
    if (falsify_cmd->parsed()) return cmd_falsify(c, out);
    if (report_cmd->parsed()) return cmd_report(c, out);
    if (compile_cmd->parsed()) return cmd_compile(c, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const stpa::CompileError& e) {
    err << "error: " << c.model_path << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace lossprobe::cli
