#pragma once

// The combined analysis report: model summary, verdicts, weakening table,
// abstract scenarios and their falsification results, with text and JSON
// renderings.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lossprobe/falsifier.hpp"
#include "lossprobe/stpa.hpp"
#include "lossprobe/vehicle.hpp"
#include "lossprobe/verifier.hpp"

namespace lossprobe::report {

inline constexpr const char* kToolName = "lossprobe";
inline constexpr const char* kToolVersion = "0.1.0";

struct LossEntry {
  std::string id, text;
  friend bool operator==(const LossEntry&, const LossEntry&) = default;
};

struct HazardEntry {
  std::string id, text;
  std::vector<std::string> losses;
  friend bool operator==(const HazardEntry&, const HazardEntry&) = default;
};

struct ConstraintEntry {
  std::string id, formula, text;
  std::vector<std::string> hazards;
  friend bool operator==(const ConstraintEntry&, const ConstraintEntry&) = default;
};

struct VerdictEntry {
  std::string target;  // SC id, or the anti-constraint formula
  std::string status;
  std::size_t answer_sets = 0;
  std::vector<std::string> counterexamples;  // formatted conjunctions
  std::vector<std::string> argument;
  friend bool operator==(const VerdictEntry&, const VerdictEntry&) = default;
};

struct WeakeningEntry {
  std::string target, slot, domain, kind, original, replacement, status;
  std::optional<std::string> counterexample;  // first one, when refuted
  friend bool operator==(const WeakeningEntry&, const WeakeningEntry&) = default;
};

struct ScenarioEntry {
  std::string id, literals, violated_sc, source_slot, source_kind;
  std::vector<std::string> hazards;
  friend bool operator==(const ScenarioEntry&, const ScenarioEntry&) = default;
};

struct BoundaryEntry {
  std::string axis;
  std::optional<double> critical;
  double violating_value = 0.0;
  double safe_value = 0.0;
  std::size_t evaluations = 0;
  friend bool operator==(const BoundaryEntry&, const BoundaryEntry&) = default;
};

struct WitnessEntry {
  std::vector<std::pair<std::string, double>> params;
  double window_start = 0.0, window_end = 0.0;
  double margin = 0.0;
  std::string trace_file;
  friend bool operator==(const WitnessEntry&, const WitnessEntry&) = default;
};

struct FalsificationEntry {
  std::string scenario;  // scenario id
  std::string status;    // found, not_found, budget_exhausted, skipped
  std::string note;      // reason a scenario was skipped
  std::size_t evaluations = 0;
  std::optional<double> best_margin;  // absent when infinite
  std::optional<WitnessEntry> witness;
  std::vector<BoundaryEntry> boundary;
  std::vector<std::string> log;
  friend bool operator==(const FalsificationEntry&, const FalsificationEntry&) = default;
};

struct Provenance {
  std::string tool = kToolName;
  std::string version = kToolVersion;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  std::optional<std::int64_t> timestamp;  // from SOURCE_DATE_EPOCH
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct CombinedReport {
  std::string model;
  std::vector<LossEntry> losses;
  std::vector<HazardEntry> hazards;
  std::vector<ConstraintEntry> constraints;
  std::vector<std::string> warnings;
  std::vector<VerdictEntry> verdicts;
  std::vector<WeakeningEntry> weakenings;
  std::vector<ScenarioEntry> scenarios;
  std::vector<FalsificationEntry> falsifications;
  Provenance provenance;
  friend bool operator==(const CombinedReport&, const CombinedReport&) = default;
};

std::string to_json(const CombinedReport& report);
/// Throws std::invalid_argument on malformed input.
CombinedReport from_json(const std::string& text);

/// Human-ordered: losses, hazards, constraints, verdicts, weakenings,
/// scenarios, falsification witnesses.
std::string to_text(const CombinedReport& report);

VerdictEntry verdict_entry(std::string target, const verify::Verdict& v);
WeakeningEntry weakening_entry(std::string target, const verify::WeakeningResult& r);
ScenarioEntry scenario_entry(const verify::AbstractLossScenario& s);
FalsificationEntry falsification_entry(std::string scenario, const falsify::FalsificationResult& r,
                                       const ParameterSpace& space);

/// Reads SOURCE_DATE_EPOCH; absent or malformed gives nothing.
std::optional<std::int64_t> source_date_epoch();

struct PipelineOptions {
  /// SCs to weaken against; empty means all, in declaration order.
  std::vector<std::string> targets;
  std::size_t budget = 200;
  std::size_t threads = falsify::default_threads();
};

struct PipelineOutput {
  CombinedReport report;
  std::map<std::string, sim::Trace> witness_traces;  // keyed by trace_file
};

/// verify every SC under the original assumptions, weaken against the
/// targets, extract scenarios (deduplicated across targets and renumbered),
/// and falsify each scenario the bridge covers over the model's space.
PipelineOutput run_pipeline(const stpa::SafetyModel& model, const sim::SimConfig& sim, const PipelineOptions& options);

}  // namespace lossprobe::report
