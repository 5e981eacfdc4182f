#include "lossprobe/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "text_util.hpp"

namespace lossprobe {

ConfigError::ConfigError(std::size_t line, const std::string& what)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

std::string_view to_string(Signal s) noexcept {
  switch (s) {
    case Signal::v: return "v";
    case Signal::omega: return "omega";
    case Signal::fx_norm: return "fx_norm";
    case Signal::effective_mu: return "effective_mu";
  }
  return "?";
}

std::string_view unit_of(Signal s) noexcept {
  switch (s) {
    case Signal::v: return "m/s";
    case Signal::omega: return "rad/s";
    default: return "";
  }
}

const PredicateSpec* Bridge::find(std::string_view proposition) const {
  auto it = std::find_if(predicates.begin(), predicates.end(),
                         [&](const PredicateSpec& p) { return p.proposition == proposition; });
  return it == predicates.end() ? nullptr : &*it;
}

const Axis* ParameterSpace::find(std::string_view path) const {
  auto it = std::find_if(axes.begin(), axes.end(), [&](const Axis& a) { return a.path == path; });
  return it == axes.end() ? nullptr : &*it;
}

void ParameterSpace::validate() const {
  if (axes.empty()) throw ConfigError(0, "parameter space has no axes");
  if (axes.size() > kMaxAxes) throw ConfigError(0, "parameter space exceeds " + std::to_string(kMaxAxes) + " axes");
  for (const auto& a : axes) {
    if (!std::isfinite(a.lower) || !std::isfinite(a.upper) || !(a.lower < a.upper)) {
      throw ConfigError(0, "axis " + a.path + " needs finite bounds with lower < upper");
    }
    if (std::count_if(axes.begin(), axes.end(), [&](const Axis& b) { return b.path == a.path; }) > 1) {
      throw ConfigError(0, "axis " + a.path + " listed twice");
    }
  }
}

namespace {

Signal parse_signal(const std::string& word, std::size_t line) {
  for (auto s : {Signal::v, Signal::omega, Signal::fx_norm, Signal::effective_mu}) {
    if (to_string(s) == word) return s;
  }
  throw ConfigError(line, "unknown signal '" + word + "' (expected v, omega, fx_norm or effective_mu)");
}

}  // namespace

void parse_bridge_line(std::string_view raw, std::size_t line_no, Bridge& bridge, ParameterSpace& space) {
  const auto line = text::trim(raw);
  if (line.empty()) return;
  auto words = text::split_ws(line);

  if (words[0] == "seed") {
    if (words.size() != 2) throw ConfigError(line_no, "expected 'seed <integer>'");
    space.seed = text::parse_u64(words[1], line_no);
    return;
  }

  if (words[0] == "axis") {
    // axis <path> [lo, hi] [tol <t>]
    const auto open = line.find('['), close = line.find(']');
    if (words.size() < 3 || open == std::string_view::npos || close == std::string_view::npos || close < open) {
      throw ConfigError(line_no, "expected 'axis <path> [lower, upper] [tol <t>]'");
    }
    Axis axis;
    axis.path = words[1];
    const auto bounds = text::split(line.substr(open + 1, close - open - 1), ',');
    if (bounds.size() != 2) throw ConfigError(line_no, "axis bounds need two values");
    axis.lower = text::parse_double(text::trim(bounds[0]), line_no);
    axis.upper = text::parse_double(text::trim(bounds[1]), line_no);
    if (!(axis.lower < axis.upper)) throw ConfigError(line_no, "axis " + axis.path + " needs lower < upper");
    const auto rest = text::split_ws(line.substr(close + 1));
    if (!rest.empty()) {
      if (rest.size() != 2 || rest[0] != "tol") throw ConfigError(line_no, "expected 'tol <value>' after axis bounds");
      axis.tolerance = text::parse_double(rest[1], line_no);
      if (!(*axis.tolerance > 0)) throw ConfigError(line_no, "tol must be positive");
    }
    if (space.find(axis.path)) throw ConfigError(line_no, "axis " + axis.path + " listed twice");
    if (space.axes.size() >= kMaxAxes) throw ConfigError(line_no, "too many axes");
    space.axes.push_back(std::move(axis));
    return;
  }

  // <PROP> := <signal> <cmp> <threshold> [unit] [dwell <seconds> [s]]
  if (words.size() < 5 || words[1] != ":=") {
    throw ConfigError(line_no, "expected '<PROP> := <signal> <|> <threshold> [unit] [dwell <seconds> [s]]'");
  }
  PredicateSpec spec;
  spec.proposition = words[0];
  spec.signal = parse_signal(words[2], line_no);
  if (words[3] == ">") {
    spec.comparator = Comparator::greater;
  } else if (words[3] == "<") {
    spec.comparator = Comparator::less;
  } else {
    throw ConfigError(line_no, "comparator must be '>' or '<'");
  }
  spec.threshold = text::parse_double(words[4], line_no);
  std::size_t i = 5;
  if (i < words.size() && words[i] != "dwell") {
    if (words[i] != unit_of(spec.signal) || unit_of(spec.signal).empty()) {
      throw ConfigError(line_no, "unit '" + words[i] + "' does not match signal " + std::string(to_string(spec.signal)));
    }
    ++i;
  }
  if (i < words.size()) {
    if (words[i] != "dwell" || i + 1 >= words.size()) throw ConfigError(line_no, "expected 'dwell <seconds>'");
    spec.dwell = text::parse_double(words[i + 1], line_no);
    i += 2;
    if (i < words.size() && words[i] == "s") ++i;
  }
  if (i != words.size()) throw ConfigError(line_no, "unexpected '" + words[i] + "'");
  if (!(spec.dwell >= 0) || !std::isfinite(spec.threshold)) throw ConfigError(line_no, "invalid threshold or dwell");
  if (bridge.find(spec.proposition)) throw ConfigError(line_no, "proposition " + spec.proposition + " bridged twice");
  bridge.predicates.push_back(std::move(spec));
}

void parse_bridge_config(std::string_view text, Bridge& bridge, ParameterSpace& space) {
  std::size_t line_no = 0;
  for (auto line : text::lines(text)) {
    ++line_no;
    parse_bridge_line(text::strip_comment(line), line_no, bridge, space);
  }
}

std::string format_predicate(const PredicateSpec& spec) {
  std::ostringstream out;
  out << spec.proposition << " := " << to_string(spec.signal) << (spec.comparator == Comparator::greater ? " > " : " < ")
      << text::format_number(spec.threshold);
  if (!unit_of(spec.signal).empty()) out << ' ' << unit_of(spec.signal);
  out << " dwell " << text::format_number(spec.dwell) << " s";
  return out.str();
}

std::string format_axis(const Axis& axis) {
  std::string out = "axis " + axis.path + " [" + text::format_number(axis.lower) + ", " +
                    text::format_number(axis.upper) + "]";
  if (axis.tolerance) out += " tol " + text::format_number(*axis.tolerance);
  return out;
}

}  // namespace lossprobe
