#pragma once

// Concretizing an abstract loss scenario: evaluate its literals on simulation
// traces through the bridge, score traces with a robustness margin, and search
// the parameter space for a trace that realizes the scenario.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lossprobe/bridge.hpp"
#include "lossprobe/formula.hpp"
#include "lossprobe/vehicle.hpp"

namespace lossprobe::falsify {

/// Number of samples before the current one a predicate must also hold on.
std::size_t dwell_samples(double dwell, double dt) noexcept;

/// Per-sample truth of each literal: true at sample k iff the strict
/// comparison (or, for a negated literal, the strict opposite comparison)
/// held on every sample of [k - dwell_samples, k]. Throws
/// std::invalid_argument when a literal has no bridge entry.
std::vector<std::vector<bool>> eval_literals(const sim::Trace& trace, const Bridge& bridge,
                                             const std::vector<PropLiteral>& literals);

/// Scenario realized at sample k: every literal true at k.
std::vector<bool> eval_scenario(const sim::Trace& trace, const Bridge& bridge, const std::vector<PropLiteral>& literals);

struct Window {
  double start = 0.0;  // s
  double end = 0.0;    // s
};

struct Robustness {
  /// Negative iff the scenario is realized somewhere; +inf when no sample has
  /// a full dwell history for every literal.
  double margin = std::numeric_limits<double>::infinity();
  /// First realizing stretch: from the start of its dwell history to the last
  /// consecutive realizing sample.
  std::optional<Window> window;
};

/// margin = -max_k min_l min_{j in dwell window of l at k} d_l(j), with
/// d = (signal - threshold) / scale for `>`, (threshold - signal) / scale for
/// `<`, negated for a negative literal; scale = |threshold|, or 1 at 0.
Robustness robustness(const sim::Trace& trace, const Bridge& bridge, const std::vector<PropLiteral>& literals);

enum class SearchStatus { found, not_found, budget_exhausted };
std::string_view to_string(SearchStatus s) noexcept;

struct Evaluation {
  std::vector<double> point;  // one value per axis
  double margin = std::numeric_limits<double>::infinity();
  std::optional<Window> window;
  std::string diagnostic;  // set when the simulation could not run
};

struct Witness {
  std::vector<double> point;
  double margin = 0.0;
  Window window;
  sim::Trace trace;
};

struct BoundaryEstimate {
  std::string axis;
  /// Midpoint of the final bracket; absent when the axis is insensitive.
  std::optional<double> critical;
  double violating_value = 0.0;
  double safe_value = 0.0;
  double violating_margin = 0.0;
  double safe_margin = 0.0;
  std::size_t evaluations = 0;
};

struct FalsificationResult {
  SearchStatus status = SearchStatus::not_found;
  std::optional<Witness> witness;
  Evaluation best;  // lowest margin seen
  std::size_t evaluations = 0;
  std::vector<BoundaryEstimate> boundary;
  std::vector<std::string> log;  // aborted candidates
};

/// Worker threads for the global phase: LOSSPROBE_THREADS if set and
/// positive, otherwise the hardware concurrency (at least 1).
std::size_t default_threads();

class Falsifier {
public:
  /// Throws std::invalid_argument for an empty scenario, a literal without a
  /// bridge entry, an invalid space, or an unknown parameter path.
  Falsifier(std::vector<PropLiteral> scenario, Bridge bridge, sim::VehicleParams params, sim::ScenarioScript script,
            ParameterSpace space, double dt = sim::kDefaultDt);

  /// Simulates with `point` applied; aborted simulations score +inf.
  Evaluation evaluate(const std::vector<double>& point) const;
  sim::Trace trace_at(const std::vector<double>& point) const;

  /// Global phase: ceil(budget / 2) points of a Cranley-Patterson rotated
  /// Halton sequence (rotation drawn from the space seed), stopping at the
  /// first realizing point. Local phase: coordinate descent from the best
  /// point with steps from a quarter of each axis width halving down to
  /// 1e-6 of it. Results do not depend on `threads`.
  FalsificationResult falsify(std::size_t budget, std::size_t threads = default_threads()) const;

  /// Bisects along `axis` between the witness and the nearest bound with a
  /// non-negative margin, other coordinates fixed at the witness, until the
  /// bracket is no wider than `tol`. Throws std::invalid_argument unless the
  /// result was found and 0 < tol <= axis width.
  BoundaryEstimate boundary_refine(const FalsificationResult& result, std::string_view axis, double tol) const;

  const ParameterSpace& space() const noexcept { return space_; }

private:
  std::vector<PropLiteral> scenario_;
  Bridge bridge_;
  sim::VehicleParams params_;
  sim::ScenarioScript script_;
  ParameterSpace space_;
  double dt_;
};

/// Radical inverse of `index` in `base`.
double radical_inverse(std::uint64_t index, unsigned base) noexcept;

}  // namespace lossprobe::falsify
