#include "lossprobe/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "lossprobe/bridge.hpp"
#include "text_util.hpp"

namespace lossprobe::sim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

bool positive(double x) { return std::isfinite(x) && x > 0; }

}  // namespace

void VehicleParams::validate() const {
  require(positive(mass), "mass must be positive");
  require(positive(wheel_radius), "wheel_radius must be positive");
  require(positive(wheel_inertia), "wheel_inertia must be positive");
  require(positive(drag_coeff), "drag_coeff must be positive");
  require(positive(gear_ratio), "gear_ratio must be positive");
  require(road_mu >= 0 && road_mu <= 2, "road_mu must lie in [0, 2]");
  require(tire_mu >= 0 && tire_mu <= 2, "tire_mu must lie in [0, 2]");
  require(peak_slip > 0 && peak_slip <= 1, "peak_slip must lie in (0, 1]");
}

double slip_ratio(double v, double omega, double wheel_radius) noexcept {
  const double surface = omega * wheel_radius;
  return (surface - v) / std::max({v, surface, kSlipEpsilon});
}

double friction_force(double slip, const VehicleParams& p) noexcept {
  const double shape = std::clamp(slip / p.peak_slip, -1.0, 1.0);
  return p.road_mu * p.tire_mu * p.mass * kGravity * shape;
}

VehicleState step(const VehicleState& s, const VehicleParams& p, const Inputs& in, double dt) {
  require(dt > 0 && dt <= kMaxDt, "dt must lie in (0, 0.01] s");
  auto local = p;
  local.road_mu = in.effective_mu;
  const double r = p.wheel_radius;
  const double drag = p.drag_coeff * s.v * s.v;

  auto omega_next = [&](double f) {
    return std::max(0.0, s.omega + dt * (in.drive_torque - in.brake_torque - f * r) / p.wheel_inertia);
  };
  auto v_next = [&](double f) { return std::max(0.0, s.v + dt * (f - drag) / p.mass); };
  auto residual = [&](double f) { return f - friction_force(slip_ratio(v_next(f), omega_next(f), r), local); };

  // residual is increasing; the root lies within the saturation bounds.
  const double cap = std::abs(local.road_mu * local.tire_mu * p.mass * kGravity);
  double lo = -cap, hi = cap;
  double f = 0.0;
  if (cap > 0 && residual(0.0) != 0.0) {
    (residual(0.0) > 0 ? hi : lo) = 0.0;
    for (int i = 0; i < 2100; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (residual(mid) > 0 ? hi : lo) = mid;
    }
    f = 0.5 * (lo + hi);
  }

  VehicleState next;
  next.t = s.t + dt;
  next.omega = omega_next(f);
  next.v = v_next(f);
  next.x = s.x + dt * next.v;
  next.fx_norm = f / (p.mass * kGravity);
  return next;
}

const Segment& ScenarioScript::at(double t) const {
  for (const auto& seg : segments) {
    if (t < seg.end) return seg;
  }
  return segments.back();
}

Segment* ScenarioScript::find(std::string_view name) {
  auto it = std::find_if(segments.begin(), segments.end(), [&](const Segment& s) { return s.name == name; });
  return it == segments.end() ? nullptr : &*it;
}

const Segment* ScenarioScript::find(std::string_view name) const {
  return const_cast<ScenarioScript*>(this)->find(name);
}

void ScenarioScript::validate() const {
  require(!segments.empty(), "script has no segments");
  require(std::isfinite(initial_speed) && initial_speed >= 0, "initial_speed must be non-negative");
  double t = 0.0;
  for (const auto& seg : segments) {
    const auto who = "segment '" + seg.name + "'";
    require(seg.start == t, who + " must start where the previous one ends (" + text::format_number(t) + ")");
    require(std::isfinite(seg.end) && seg.end > seg.start, who + " has non-positive length");
    require(std::isfinite(seg.drive_torque) && seg.drive_torque >= 0, who + ": drive_torque must be >= 0");
    require(std::isfinite(seg.brake_torque) && seg.brake_torque >= 0, who + ": brake_torque must be >= 0");
    if (seg.mu_override) require(*seg.mu_override >= 0 && *seg.mu_override <= 2, who + ": mu_override must lie in [0, 2]");
    t = seg.end;
  }
}

ScenarioScript default_braking_script() {
  ScenarioScript s;
  s.initial_speed = 20.0;
  s.segments.push_back({"dry", 0.0, 1.0, 0.0, 2400.0, std::nullopt});
  s.segments.push_back({"ice", 1.0, 3.0, 0.0, 2400.0, 1.0});
  return s;
}

double Trace::rpm(std::size_t i) const {
  return samples.at(i).omega * gear_ratio * 60.0 / (2.0 * std::numbers::pi);
}

SimulationError::SimulationError(std::size_t last_good_index, const std::string& what)
    : std::runtime_error(what + " (last good sample " + std::to_string(last_good_index) + ")"),
      last_good_(last_good_index) {}

Trace simulate(const VehicleParams& params, const ScenarioScript& script, double dt, double t_end) {
  params.validate();
  script.validate();
  require(dt > 0 && dt <= kMaxDt, "dt must lie in (0, 0.01] s");
  require(std::isfinite(t_end) && t_end > 0, "t_end must be positive");
  const double steps_real = std::round(t_end / dt);
  require(steps_real + 1 <= static_cast<double>(kMaxSamples), "too many samples");
  const auto steps = static_cast<std::size_t>(steps_real);

  Trace trace;
  trace.dt = dt;
  trace.gear_ratio = params.gear_ratio;
  trace.samples.reserve(steps + 1);
  trace.effective_mu.reserve(steps + 1);

  auto mu_at = [&](double t) { return script.at(t).mu_override.value_or(params.road_mu); };

  VehicleState s;
  s.v = script.initial_speed;
  s.omega = script.initial_speed / params.wheel_radius;
  {
    auto local = params;
    local.road_mu = mu_at(0.0);
    s.fx_norm = friction_force(slip_ratio(s.v, s.omega, params.wheel_radius), local) / (params.mass * kGravity);
  }
  trace.samples.push_back(s);
  trace.effective_mu.push_back(mu_at(0.0));

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const auto& seg = script.at(t);
    auto next = step(s, params, {seg.drive_torque, seg.brake_torque, mu_at(t)}, dt);
    next.t = static_cast<double>(k + 1) * dt;
    if (!std::isfinite(next.v) || !std::isfinite(next.omega) || !std::isfinite(next.x) ||
        !std::isfinite(next.fx_norm)) {
      throw SimulationError(k, "non-finite state at t = " + text::format_number(next.t));
    }
    s = next;
    trace.samples.push_back(s);
    trace.effective_mu.push_back(mu_at(s.t));
  }
  return trace;
}

void write_csv(std::ostream& out, const Trace& trace) {
  out << "t,v,omega,x,fx_norm,effective_mu,rpm\n";
  char buf[512];
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const auto& s = trace.samples[i];
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", s.t, s.v, s.omega, s.x, s.fx_norm,
                  trace.effective_mu[i], trace.rpm(i));
    out << buf;
  }
}

namespace {

double* vehicle_field(VehicleParams& p, std::string_view name) {
  if (name == "mass") return &p.mass;
  if (name == "wheel_radius") return &p.wheel_radius;
  if (name == "wheel_inertia") return &p.wheel_inertia;
  if (name == "road_mu") return &p.road_mu;
  if (name == "tire_mu") return &p.tire_mu;
  if (name == "drag_coeff") return &p.drag_coeff;
  if (name == "peak_slip") return &p.peak_slip;
  if (name == "gear_ratio") return &p.gear_ratio;
  return nullptr;
}

bool set_segment_key(Segment& seg, std::string_view key, double value) {
  if (key == "drive_torque") {
    seg.drive_torque = value;
  } else if (key == "brake_torque") {
    seg.brake_torque = value;
  } else if (key == "mu_override") {
    seg.mu_override = value;
  } else {
    return false;
  }
  return true;
}

}  // namespace

void set_parameter(VehicleParams& params, ScenarioScript& script, std::string_view path, double value) {
  const auto parts = text::split(path, '.');
  auto unknown = [&] { return std::invalid_argument("unknown parameter path '" + std::string(path) + "'"); };
  if (parts.size() == 2 && parts[0] == "vehicle") {
    auto* field = vehicle_field(params, parts[1]);
    if (!field) throw unknown();
    *field = value;
  } else if (parts.size() == 2 && parts[0] == "script" && parts[1] == "initial_speed") {
    script.initial_speed = value;
  } else if (parts.size() == 3 && parts[0] == "script") {
    if (parts[1] == "*") {
      for (auto& seg : script.segments) {
        if (!set_segment_key(seg, parts[2], value)) throw unknown();
      }
      if (script.segments.empty()) throw unknown();
    } else {
      auto* seg = script.find(parts[1]);
      if (!seg || !set_segment_key(*seg, parts[2], value)) throw unknown();
    }
  } else {
    throw unknown();
  }
}

double get_parameter(const VehicleParams& params, const ScenarioScript& script, std::string_view path) {
  auto p = params;
  const auto parts = text::split(path, '.');
  auto unknown = [&] { return std::invalid_argument("unknown parameter path '" + std::string(path) + "'"); };
  if (parts.size() == 2 && parts[0] == "vehicle") {
    auto* field = vehicle_field(p, parts[1]);
    if (!field) throw unknown();
    return *field;
  }
  if (parts.size() == 2 && parts[0] == "script" && parts[1] == "initial_speed") return script.initial_speed;
  if (parts.size() == 3 && parts[0] == "script" && !script.segments.empty()) {
    const auto* seg = parts[1] == "*" ? &script.segments.front() : script.find(parts[1]);
    if (!seg) throw unknown();
    if (parts[2] == "drive_torque") return seg->drive_torque;
    if (parts[2] == "brake_torque") return seg->brake_torque;
    if (parts[2] == "mu_override") return seg->mu_override.value_or(params.road_mu);
  }
  throw unknown();
}

SimConfig parse_sim_config(std::string_view source) {
  SimConfig cfg;
  std::vector<Segment> segments;
  std::string section;
  Segment* seg = nullptr;
  std::size_t line_no = 0;
  for (auto raw : text::lines(source)) {
    ++line_no;
    const auto line = text::trim(text::strip_comment(raw, "%#;"));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "unterminated section header");
      const auto words = text::split_ws(line.substr(1, line.size() - 2));
      if (words.empty()) throw ConfigError(line_no, "empty section header");
      section = words[0];
      seg = nullptr;
      if (section == "segment") {
        if (words.size() != 2) throw ConfigError(line_no, "expected [segment NAME]");
        for (const auto& s : segments) {
          if (s.name == words[1]) throw ConfigError(line_no, "segment '" + words[1] + "' defined twice");
        }
        segments.push_back({words[1], 0.0, 0.0, 0.0, 0.0, std::nullopt});
        seg = &segments.back();
      } else if (words.size() != 1 || (section != "vehicle" && section != "script" && section != "simulation")) {
        throw ConfigError(line_no, "unknown section '" + std::string(line) + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
    const auto key = text::trim(line.substr(0, eq));
    const double value = text::parse_double(text::trim(line.substr(eq + 1)), line_no);
    bool known = false;
    if (section == "vehicle") {
      if (auto* field = vehicle_field(cfg.params, key)) {
        *field = value;
        known = true;
      }
    } else if (section == "simulation") {
      if (key == "dt") {
        cfg.dt = value;
        known = true;
      }
    } else if (section == "script") {
      if (key == "initial_speed") {
        cfg.script.initial_speed = value;
        known = true;
      }
    } else if (seg) {
      if (key == "start") {
        seg->start = value;
        known = true;
      } else if (key == "end") {
        seg->end = value;
        known = true;
      } else {
        known = set_segment_key(*seg, key, value);
      }
    } else {
      throw ConfigError(line_no, "entry outside any section");
    }
    if (!known) throw ConfigError(line_no, "unknown key '" + std::string(key) + "' in [" + section + "]");
  }
  if (!segments.empty()) cfg.script.segments = std::move(segments);
  try {
    cfg.params.validate();
    cfg.script.validate();
    require(cfg.dt > 0 && cfg.dt <= kMaxDt, "dt must lie in (0, 0.01] s");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  return cfg;
}

}  // namespace lossprobe::sim
