#pragma once

// Quarter-car longitudinal dynamics: one wheel carrying the whole vehicle
// mass, a rise-then-saturate tyre friction curve, brake and drive torques on
// the wheel, and quadratic aerodynamic drag on the body.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lossprobe::sim {

inline constexpr double kGravity = 9.81;         // m/s^2
inline constexpr double kSlipEpsilon = 0.1;      // m/s, floor of the slip denominator
inline constexpr double kMaxDt = 0.01;           // s
inline constexpr double kDefaultDt = 0.002;      // s
inline constexpr std::size_t kMaxSamples = 10'000'000;

struct VehicleParams {
  double mass = 1500.0;          // kg
  double wheel_radius = 0.33;    // m
  double wheel_inertia = 1.5;    // kg m^2
  double road_mu = 1.0;
  double tire_mu = 1.0;
  double drag_coeff = 0.38;      // kg/m
  double peak_slip = 0.15;
  double gear_ratio = 8.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  friend bool operator==(const VehicleParams&, const VehicleParams&) = default;
};

struct VehicleState {
  double t = 0.0;
  double v = 0.0;       // m/s
  double omega = 0.0;   // rad/s
  double x = 0.0;       // m
  double fx_norm = 0.0; // longitudinal tyre force / (m g)
};

struct Inputs {
  double drive_torque = 0.0;  // N m
  double brake_torque = 0.0;  // N m
  double effective_mu = 1.0;  // road friction in effect
};

/// (omega r - v) / max(v, omega r, kSlipEpsilon).
double slip_ratio(double v, double omega, double wheel_radius) noexcept;

/// road_mu * tire_mu * m * g * sign(slip) * min(|slip| / peak_slip, 1).
double friction_force(double slip, const VehicleParams& params) noexcept;

/// Advances one step of length dt (0 < dt <= kMaxDt).
///
/// The tyre force is taken at the end of the step: F solves
///   F = friction(slip(v'(F), omega'(F)))
///   omega'(F) = max(0, omega + dt (drive - brake - F r) / I)
///   v'(F)     = max(0, v + dt (F - drag v^2) / m)
/// which has a unique root because the right-hand side is non-increasing in F.
/// Brake torque therefore acts like Coulomb friction at omega = 0: it holds a
/// stopped wheel instead of reversing it. Kinetic energy never increases
/// without drive torque.
VehicleState step(const VehicleState& state, const VehicleParams& params, const Inputs& inputs, double dt);

struct Segment {
  std::string name;
  double start = 0.0;  // s
  double end = 0.0;    // s
  double drive_torque = 0.0;
  double brake_torque = 0.0;
  std::optional<double> mu_override;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct ScenarioScript {
  double initial_speed = 0.0;  // m/s, wheel starts rolling freely (omega = v / r)
  std::vector<Segment> segments;

  double t_end() const noexcept { return segments.empty() ? 0.0 : segments.back().end; }
  /// Segment in force at time t; the last segment also covers its end point.
  const Segment& at(double t) const;
  Segment* find(std::string_view name);
  const Segment* find(std::string_view name) const;
  /// Throws std::invalid_argument unless segments are non-empty, contiguous
  /// from 0, of positive length, with non-negative torques and mu in [0, 2].
  void validate() const;

  friend bool operator==(const ScenarioScript&, const ScenarioScript&) = default;
};

/// Brake from 20 m/s with 2400 N m: one second on the nominal road ("dry"),
/// then two seconds on a segment ("ice") whose mu_override is 1.0 until a
/// scenario search changes it.
ScenarioScript default_braking_script();

struct Trace {
  double dt = 0.0;
  double gear_ratio = 0.0;
  std::vector<VehicleState> samples;
  std::vector<double> effective_mu;  // parallel to samples

  /// Engine speed implied by the wheel speed, rev/min.
  double rpm(std::size_t i) const;
};

class SimulationError : public std::runtime_error {
public:
  SimulationError(std::size_t last_good_index, const std::string& what);
  std::size_t last_good_index() const noexcept { return last_good_; }

private:
  std::size_t last_good_;
};

/// Samples at t = k dt for k = 0 .. round(t_end / dt).
Trace simulate(const VehicleParams& params, const ScenarioScript& script, double dt, double t_end);
inline Trace simulate(const VehicleParams& params, const ScenarioScript& script, double dt = kDefaultDt) {
  return simulate(params, script, dt, script.t_end());
}

/// Header `t,v,omega,x,fx_norm,effective_mu,rpm`, 12 significant digits.
void write_csv(std::ostream& out, const Trace& trace);

struct SimConfig {
  VehicleParams params;
  ScenarioScript script = default_braking_script();
  double dt = kDefaultDt;
};

/// INI-style text:
///   [vehicle]        mass = 1500, wheel_radius = ..., ...
///   [simulation]     dt = 0.002
///   [script]         initial_speed = 20
///   [segment NAME]   start = 0, end = 1, brake_torque = 2400, mu_override = 0.3
/// Any [segment] section replaces the default script's segments. Throws
/// ConfigError.
SimConfig parse_sim_config(std::string_view text);

/// Parameter paths searched by the falsifier:
///   vehicle.<field>                     any VehicleParams field
///   script.initial_speed
///   script.<segment>.<key>              drive_torque, brake_torque, mu_override
///   script.*.<key>                      every segment
/// Throws std::invalid_argument for unknown paths.
void set_parameter(VehicleParams& params, ScenarioScript& script, std::string_view path, double value);
double get_parameter(const VehicleParams& params, const ScenarioScript& script, std::string_view path);

}  // namespace lossprobe::sim
