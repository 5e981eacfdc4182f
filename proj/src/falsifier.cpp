#include "lossprobe/falsifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <thread>

namespace lossprobe::falsify {

std::string_view to_string(SearchStatus s) noexcept {
  switch (s) {
    case SearchStatus::found: return "found";
    case SearchStatus::not_found: return "not_found";
    case SearchStatus::budget_exhausted: return "budget_exhausted";
  }
  return "?";
}

std::size_t dwell_samples(double dwell, double dt) noexcept {
  if (!(dwell > 0)) return 0;
  return static_cast<std::size_t>(std::ceil(dwell / dt - 1e-9));
}

namespace {

double signal_of(const sim::Trace& trace, std::size_t i, Signal s) {
  const auto& x = trace.samples[i];
  switch (s) {
    case Signal::v: return x.v;
    case Signal::omega: return x.omega;
    case Signal::fx_norm: return x.fx_norm;
    case Signal::effective_mu: return trace.effective_mu[i];
  }
  return 0.0;
}

const PredicateSpec& spec_for(const Bridge& bridge, const PropLiteral& l) {
  const auto* spec = bridge.find(l.id);
  if (!spec) throw std::invalid_argument("no bridge entry for proposition " + l.id);
  return *spec;
}

// Signed satisfaction distance of a literal at one sample; > 0 iff the strict
// comparison for the literal holds.
double distance(const sim::Trace& trace, std::size_t i, const PredicateSpec& spec, bool negated) {
  const double scale = spec.threshold == 0.0 ? 1.0 : std::abs(spec.threshold);
  const double s = signal_of(trace, i, spec.signal);
  double d = spec.comparator == Comparator::greater ? (s - spec.threshold) / scale : (spec.threshold - s) / scale;
  return negated ? -d : d;
}

}  // namespace

std::vector<std::vector<bool>> eval_literals(const sim::Trace& trace, const Bridge& bridge,
                                             const std::vector<PropLiteral>& literals) {
  std::vector<std::vector<bool>> out;
  for (const auto& l : literals) {
    const auto& spec = spec_for(bridge, l);
    const auto m = dwell_samples(spec.dwell, trace.dt);
    std::vector<bool> series(trace.samples.size(), false);
    std::size_t run = 0;
    for (std::size_t k = 0; k < trace.samples.size(); ++k) {
      run = distance(trace, k, spec, l.negated) > 0 ? run + 1 : 0;
      series[k] = run >= m + 1;
    }
    out.push_back(std::move(series));
  }
  return out;
}

std::vector<bool> eval_scenario(const sim::Trace& trace, const Bridge& bridge, const std::vector<PropLiteral>& literals) {
  const auto per = eval_literals(trace, bridge, literals);
  std::vector<bool> out(trace.samples.size(), !literals.empty());
  for (const auto& series : per) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = out[k] && series[k];
  }
  return out;
}

Robustness robustness(const sim::Trace& trace, const Bridge& bridge, const std::vector<PropLiteral>& literals) {
  if (literals.empty()) throw std::invalid_argument("scenario has no literals");
  const std::size_t n = trace.samples.size();
  std::size_t longest = 0;
  // Per literal: sliding-window minimum of the distance over its dwell window.
  std::vector<std::vector<double>> window_min;
  for (const auto& l : literals) {
    const auto& spec = spec_for(bridge, l);
    const auto m = dwell_samples(spec.dwell, trace.dt);
    longest = std::max(longest, m);
    std::vector<double> d(n);
    for (std::size_t k = 0; k < n; ++k) d[k] = distance(trace, k, spec, l.negated);
    std::vector<double> mins(n, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> dq;  // indices with increasing d
    std::size_t head = 0;
    for (std::size_t k = 0; k < n; ++k) {
      while (dq.size() > head && d[dq.back()] >= d[k]) dq.pop_back();
      dq.push_back(k);
      while (dq[head] + m < k) ++head;
      if (k >= m) mins[k] = d[dq[head]];
    }
    window_min.push_back(std::move(mins));
  }

  Robustness out;
  double best = -std::numeric_limits<double>::infinity();
  std::optional<std::size_t> first;
  std::size_t last = 0;
  for (std::size_t k = longest; k < n; ++k) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& mins : window_min) worst = std::min(worst, mins[k]);
    best = std::max(best, worst);
    if (worst > 0) {
      if (!first) {
        first = last = k;
      } else if (last + 1 == k) {
        last = k;
      }
    }
  }
  if (longest < n) out.margin = -best;
  if (first) out.window = Window{trace.samples[*first - longest].t, trace.samples[last].t};
  return out;
}

std::size_t default_threads() {
  if (const char* env = std::getenv("LOSSPROBE_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

double radical_inverse(std::uint64_t index, unsigned base) noexcept {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

namespace {

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
static_assert(std::size(kPrimes) >= kMaxAxes);

}  // namespace

Falsifier::Falsifier(std::vector<PropLiteral> scenario, Bridge bridge, sim::VehicleParams params,
                     sim::ScenarioScript script, ParameterSpace space, double dt)
    : scenario_(std::move(scenario)),
      bridge_(std::move(bridge)),
      params_(params),
      script_(std::move(script)),
      space_(std::move(space)),
      dt_(dt) {
  if (scenario_.empty()) throw std::invalid_argument("scenario has no literals");
  for (const auto& l : scenario_) spec_for(bridge_, l);
  try {
    space_.validate();
  } catch (const ConfigError& e) {
    throw std::invalid_argument(e.what());
  }
  auto p = params_;
  auto s = script_;
  for (const auto& a : space_.axes) sim::set_parameter(p, s, a.path, a.lower);
}

sim::Trace Falsifier::trace_at(const std::vector<double>& point) const {
  if (point.size() != space_.axes.size()) throw std::invalid_argument("point dimension does not match the space");
  auto p = params_;
  auto s = script_;
  for (std::size_t i = 0; i < point.size(); ++i) sim::set_parameter(p, s, space_.axes[i].path, point[i]);
  return sim::simulate(p, s, dt_);
}

Evaluation Falsifier::evaluate(const std::vector<double>& point) const {
  Evaluation e;
  e.point = point;
  try {
    const auto r = robustness(trace_at(point), bridge_, scenario_);
    e.margin = r.margin;
    e.window = r.window;
  } catch (const std::exception& ex) {
    e.margin = std::numeric_limits<double>::infinity();
    e.diagnostic = ex.what();
  }
  return e;
}

FalsificationResult Falsifier::falsify(std::size_t budget, std::size_t threads) const {
  if (budget == 0) throw std::invalid_argument("budget must be at least 1");
  threads = std::max<std::size_t>(threads, 1);
  const auto& axes = space_.axes;
  const std::size_t dim = axes.size();

  FalsificationResult result;
  auto record = [&](const Evaluation& e, std::size_t index) {
    ++result.evaluations;
    if (!e.diagnostic.empty()) result.log.push_back("evaluation " + std::to_string(index) + ": " + e.diagnostic);
    if (result.evaluations == 1 || e.margin < result.best.margin) result.best = e;
    if (e.margin < 0) {
      result.status = SearchStatus::found;
      result.witness = Witness{e.point, e.margin, e.window.value_or(Window{}), trace_at(e.point)};
      return true;
    }
    return false;
  };

  std::mt19937_64 rng(space_.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> shift(dim);
  for (auto& s : shift) s = unit(rng);
  auto halton = [&](std::size_t i) {
    std::vector<double> x(dim);
    for (std::size_t a = 0; a < dim; ++a) {
      double u = radical_inverse(i + 1, kPrimes[a]) + shift[a];
      u -= std::floor(u);
      x[a] = axes[a].lower + u * (axes[a].upper - axes[a].lower);
    }
    return x;
  };

  // Global phase, evaluated in batches; results are consumed in index order
  // and anything computed past the first realizing point is discarded.
  const std::size_t global = (budget + 1) / 2;
  for (std::size_t start = 0; start < global; start += threads) {
    const std::size_t count = std::min(threads, global - start);
    std::vector<Evaluation> batch(count);
    if (count == 1) {
      batch[0] = evaluate(halton(start));
    } else {
      std::vector<std::thread> workers;
      for (std::size_t j = 0; j < count; ++j) {
        workers.emplace_back([&, j] { batch[j] = evaluate(halton(start + j)); });
      }
      for (auto& w : workers) w.join();
    }
    for (std::size_t j = 0; j < count; ++j) {
      if (record(batch[j], start + j)) return result;
    }
  }

  // Local phase.
  std::vector<double> x = result.best.point;
  double fx = result.best.margin;
  std::vector<double> step(dim), min_step(dim);
  for (std::size_t a = 0; a < dim; ++a) {
    const double width = axes[a].upper - axes[a].lower;
    step[a] = 0.25 * width;
    min_step[a] = 1e-6 * width;
  }
  std::size_t index = global;
  for (;;) {
    bool active = false;
    for (std::size_t a = 0; a < dim; ++a) {
      if (step[a] < min_step[a]) continue;
      active = true;
      bool moved = false;
      for (double dir : {1.0, -1.0}) {
        auto y = x;
        y[a] = std::clamp(x[a] + dir * step[a], axes[a].lower, axes[a].upper);
        if (y[a] == x[a]) continue;
        if (result.evaluations >= budget) {
          result.status = SearchStatus::budget_exhausted;
          return result;
        }
        const auto e = evaluate(y);
        if (record(e, index++)) return result;
        if (e.margin < fx) {
          x = y;
          fx = e.margin;
          moved = true;
          break;
        }
      }
      if (!moved) step[a] /= 2;
    }
    if (!active) break;
  }
  result.status = SearchStatus::not_found;
  return result;
}

BoundaryEstimate Falsifier::boundary_refine(const FalsificationResult& result, std::string_view axis, double tol) const {
  if (result.status != SearchStatus::found || !result.witness) {
    throw std::invalid_argument("boundary refinement needs a found witness");
  }
  const auto& axes = space_.axes;
  auto it = std::find_if(axes.begin(), axes.end(), [&](const Axis& a) { return a.path == axis; });
  if (it == axes.end()) throw std::invalid_argument("axis " + std::string(axis) + " is not in the space");
  const auto a = static_cast<std::size_t>(it - axes.begin());
  const double width = it->upper - it->lower;
  if (!(tol > 0) || tol > width) throw std::invalid_argument("tol must lie in (0, axis width]");

  BoundaryEstimate out;
  out.axis = std::string(axis);
  auto at = [&](double value) {
    auto p = result.witness->point;
    p[a] = value;
    ++out.evaluations;
    return evaluate(p).margin;
  };

  double bad = result.witness->point[a];
  double bad_margin = result.witness->margin;
  const double lo_margin = at(it->lower);
  const double hi_margin = at(it->upper);
  std::optional<double> good;
  double good_margin = 0.0;
  for (auto [bound, m] : {std::pair{it->lower, lo_margin}, std::pair{it->upper, hi_margin}}) {
    if (m >= 0 && (!good || std::abs(bound - bad) < std::abs(*good - bad))) {
      good = bound;
      good_margin = m;
    }
  }
  out.violating_value = bad;
  out.violating_margin = bad_margin;
  if (!good) return out;  // the margin never turns non-negative along this axis

  while (std::abs(*good - bad) > tol) {
    const double mid = 0.5 * (bad + *good);
    const double m = at(mid);
    if (m < 0) {
      bad = mid;
      bad_margin = m;
    } else {
      good = mid;
      good_margin = m;
    }
  }
  out.critical = 0.5 * (bad + *good);
  out.violating_value = bad;
  out.violating_margin = bad_margin;
  out.safe_value = *good;
  out.safe_margin = good_margin;
  return out;
}

}  // namespace lossprobe::falsify
