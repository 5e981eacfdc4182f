#pragma once

// Mapping from abstract propositions to predicates over simulation traces,
// and the parameter space searched when concretizing a scenario. Both are
// hand-written configuration: either a `bridge:` section in a model file or a
// standalone config.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lossprobe {

class ConfigError : public std::runtime_error {
public:
  ConfigError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

enum class Signal { v, omega, fx_norm, effective_mu };
enum class Comparator { greater, less };

std::string_view to_string(Signal s) noexcept;
/// Unit symbol for a signal, empty for dimensionless signals.
std::string_view unit_of(Signal s) noexcept;

/// `signal cmp threshold`, required to hold continuously for `dwell` seconds.
/// Both comparators are strict, and so is the negation used for `!P`
/// (`omega > 0.5` negates to `omega < 0.5`).
struct PredicateSpec {
  std::string proposition;
  Signal signal = Signal::v;
  Comparator comparator = Comparator::greater;
  double threshold = 0.0;
  double dwell = 0.0;  // seconds

  friend bool operator==(const PredicateSpec&, const PredicateSpec&) = default;
};

struct Bridge {
  std::vector<PredicateSpec> predicates;

  const PredicateSpec* find(std::string_view proposition) const;
  bool empty() const noexcept { return predicates.empty(); }
  friend bool operator==(const Bridge&, const Bridge&) = default;
};

struct Axis {
  std::string path;  // e.g. vehicle.drag_coeff, script.ice.mu_override
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> tolerance;  // set when the axis should be boundary-refined

  friend bool operator==(const Axis&, const Axis&) = default;
};

inline constexpr std::size_t kMaxAxes = 16;

struct ParameterSpace {
  std::vector<Axis> axes;
  std::uint64_t seed = 0;

  const Axis* find(std::string_view path) const;
  void validate() const;
  friend bool operator==(const ParameterSpace&, const ParameterSpace&) = default;
};

/// Parses one line of bridge configuration into `bridge`/`space`:
///   WT := omega > 0.5 rad/s dwell 0.2 s
///   axis script.ice.mu_override [0.1, 1.0] tol 0.01
///   seed 42
void parse_bridge_line(std::string_view line, std::size_t line_no, Bridge& bridge, ParameterSpace& space);

/// Standalone form: one bridge line per line, `%`/`#` comments.
void parse_bridge_config(std::string_view text, Bridge& bridge, ParameterSpace& space);

std::string format_predicate(const PredicateSpec& spec);
std::string format_axis(const Axis& axis);

}  // namespace lossprobe
