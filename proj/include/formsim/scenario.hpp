#ifndef FORMSIM_SCENARIO_HPP
#define FORMSIM_SCENARIO_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "formsim/analysis.hpp"
#include "formsim/controllers.hpp"
#include "formsim/dynamics.hpp"
#include "formsim/error.hpp"
#include "formsim/graph.hpp"

namespace formsim {

/// Optional acceptance expectations attached to a bundled scenario. `run`
/// uses `tolerance`; `check` uses all of it.
struct CheckSpec {
  std::optional<std::string> name;
  std::optional<double> tolerance;
  std::vector<double> alphas;            // non-empty: the scenario is an α sweep
  std::optional<double> max_ratio;       // sweep: last/first error bound
  std::optional<double> span_ratio;      // run: final max pair span / shape span

  friend bool operator==(const CheckSpec&, const CheckSpec&) = default;
};

struct Scenario {
  std::size_t n = 0;
  std::vector<EdgeSpec> edges;  // 1-based
  ControllerKind kind = ControllerKind::Consensus;
  FormationSpec spec;
  MultiplexState initial;
  SimConfig config;
  std::uint64_t seed = 0;
  std::optional<CheckSpec> check;

  // Derived at load time.
  Graph graph;
  std::vector<std::string> warnings;

  bool operator==(const Scenario& o) const {
    auto same_edges = [](const std::vector<EdgeSpec>& a, const std::vector<EdgeSpec>& b) {
      return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                        [](const EdgeSpec& p, const EdgeSpec& q) { return p.i == q.i && p.j == q.j; });
    };
    return n == o.n && same_edges(edges, o.edges) && kind == o.kind && spec == o.spec && initial == o.initial &&
           config == o.config && seed == o.seed && check == o.check;
  }
};

inline double default_tolerance(ControllerKind kind) { return is_multiplex(kind) ? 1e-4 : 1e-6; }

namespace detail {

using nlohmann::json;

[[noreturn]] inline void field_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ParseError, "field '" + field + "': " + what);
}

inline double number_field(const json& v, const std::string& field) {
  if (!v.is_number()) field_error(field, "expected a number");
  return v.get<double>();
}

inline std::size_t count_field(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<long long>() < 0) field_error(field, "expected a non-negative integer");
  return v.get<std::size_t>();
}

inline std::vector<double> number_list(const json& v, const std::string& field) {
  if (!v.is_array()) field_error(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number_field(v[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

inline std::vector<Vec2> point_list(const json& v, const std::string& field) {
  if (!v.is_array()) field_error(field, "expected an array of [x, y] points");
  std::vector<Vec2> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto name = field + "[" + std::to_string(k) + "]";
    const auto p = number_list(v[k], name);
    if (p.size() != 2) field_error(name, "expected exactly two coordinates");
    out.push_back({p[0], p[1]});
  }
  return out;
}

inline ParameterSignal signal_field(const json& v, const std::string& field) {
  if (v.is_number()) return ParameterSignal::constant(v.get<double>());
  if (!v.is_object()) field_error(field, "expected a number or a signal object");
  ParameterSignal s;
  for (const auto& [key, val] : v.items()) {
    const auto name = field + "." + key;
    if (key == "kind") {
      const auto k = val.is_string() ? val.get<std::string>() : std::string{};
      if (k == "constant") s.kind = SignalKind::Constant;
      else if (k == "step") s.kind = SignalKind::Step;
      else if (k == "ramp") s.kind = SignalKind::Ramp;
      else if (k == "sinusoid") s.kind = SignalKind::Sinusoid;
      else field_error(name, "expected one of constant, step, ramp, sinusoid");
    } else if (key == "base") s.base = number_field(val, name);
    else if (key == "amplitude") s.amplitude = number_field(val, name);
    else if (key == "frequency") s.frequency = number_field(val, name);
    else if (key == "phase") s.phase = number_field(val, name);
    else if (key == "step_time") s.step_time = number_field(val, name);
    else if (key == "slope") s.slope = number_field(val, name);
    else if (key == "value_bound") s.value_bound = number_field(val, name);
    else if (key == "rate_bound") s.rate_bound = number_field(val, name);
    else field_error(name, "unknown signal field");
  }
  return s;
}

inline json signal_json(const ParameterSignal& s) {
  json j = {{"kind", std::string(to_string(s.kind))}, {"base", s.base}};
  if (s.amplitude != 0.0) j["amplitude"] = s.amplitude;
  if (s.frequency != 0.0) j["frequency"] = s.frequency;
  if (s.phase != 0.0) j["phase"] = s.phase;
  if (s.step_time != 0.0) j["step_time"] = s.step_time;
  if (s.slope != 0.0) j["slope"] = s.slope;
  if (s.value_bound) j["value_bound"] = *s.value_bound;
  if (s.rate_bound) j["rate_bound"] = *s.rate_bound;
  return j;
}

inline json points_json(const std::vector<Vec2>& pts) {
  json j = json::array();
  for (const auto& p : pts) j.push_back({p.x, p.y});
  return j;
}

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Re-raises any library error as a ValidationError with the same message.
template <typename F>
void as_validation(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError || e.code() == ErrorCode::ValidationError) throw;
    std::string msg = e.what();
    const auto colon = msg.find(": ");
    throw Error(ErrorCode::ValidationError, colon == std::string::npos ? msg : msg.substr(colon + 2));
  }
}

}  // namespace detail

/// Parses and validates a JSON scenario document. Omitted fields default to
/// x0 = xi, gamma0 = 1, theta0 = 0, dt = 0.01, t_final = 50, method = rk4,
/// stride = 1, seed = 0. `x0` may also be {"uniform": [lo, hi]}, drawn from
/// the seed.
inline Scenario load_scenario(std::string_view text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(detail::line_of_offset(text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "line 1: scenario must be a JSON object");

  static const std::vector<std::string> known = {"n",      "edges",  "kind",   "xi",      "leaders", "gamma_ref",
                                                 "theta_ref", "alpha", "x0",     "gamma0",  "theta0",  "dt",
                                                 "t_final", "method", "stride", "seed",    "check"};
  for (const auto& [key, _] : doc.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) detail::field_error(key, "unknown field");

  Scenario sc;
  if (!doc.contains("n")) detail::field_error("n", "missing");
  sc.n = detail::count_field(doc["n"], "n");
  if (sc.n == 0) detail::field_error("n", "must be at least 1");

  if (doc.contains("edges")) {
    const auto& e = doc["edges"];
    if (!e.is_array()) detail::field_error("edges", "expected an array of [i, j] pairs");
    for (std::size_t k = 0; k < e.size(); ++k) {
      const auto name = "edges[" + std::to_string(k) + "]";
      if (!e[k].is_array() || e[k].size() != 2) detail::field_error(name, "expected a pair [i, j]");
      sc.edges.push_back({detail::count_field(e[k][0], name), detail::count_field(e[k][1], name)});
    }
  }

  if (!doc.contains("kind")) detail::field_error("kind", "missing");
  if (!doc["kind"].is_string()) detail::field_error("kind", "expected a string");
  const auto kind = parse_controller_kind(doc["kind"].get<std::string>());
  if (!kind) detail::field_error("kind", "expected consensus, invariant_formation, density or density_orientation");
  sc.kind = *kind;

  if (doc.contains("xi")) sc.spec.xi = detail::point_list(doc["xi"], "xi");
  else if (sc.kind == ControllerKind::Consensus) sc.spec.xi.assign(sc.n, Vec2{});
  else detail::field_error("xi", "missing (required by the " + std::string(to_string(sc.kind)) + " controller)");

  if (doc.contains("leaders")) {
    const auto& l = doc["leaders"];
    if (!l.is_array()) detail::field_error("leaders", "expected an array of 0/1 flags");
    for (std::size_t k = 0; k < l.size(); ++k) {
      if (!l[k].is_number_integer()) detail::field_error("leaders[" + std::to_string(k) + "]", "expected 0 or 1");
      sc.spec.leaders.push_back(l[k].get<int>());
    }
  } else if (!is_multiplex(sc.kind)) {
    sc.spec.leaders.assign(sc.n, 0);
  } else {
    detail::field_error("leaders", "missing (required by the " + std::string(to_string(sc.kind)) + " controller)");
  }

  if (doc.contains("gamma_ref")) sc.spec.gamma_ref = detail::signal_field(doc["gamma_ref"], "gamma_ref");
  if (doc.contains("theta_ref")) sc.spec.theta_ref = detail::signal_field(doc["theta_ref"], "theta_ref");
  if (doc.contains("alpha")) sc.spec.alpha = detail::number_field(doc["alpha"], "alpha");

  if (doc.contains("dt")) sc.config.dt = detail::number_field(doc["dt"], "dt");
  if (doc.contains("t_final")) sc.config.t_final = detail::number_field(doc["t_final"], "t_final");
  if (doc.contains("method")) {
    const auto m = doc["method"].is_string() ? parse_method(doc["method"].get<std::string>()) : std::nullopt;
    if (!m) detail::field_error("method", "expected euler or rk4");
    sc.config.method = *m;
  }
  if (doc.contains("stride")) sc.config.record_stride = detail::count_field(doc["stride"], "stride");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) detail::field_error("seed", "expected a non-negative integer");
    sc.seed = doc["seed"].get<std::uint64_t>();
  }

  if (doc.contains("x0")) {
    const auto& x0 = doc["x0"];
    if (x0.is_object()) {
      if (!x0.contains("uniform") || x0.size() != 1) detail::field_error("x0", "expected {\"uniform\": [lo, hi]}");
      const auto range = detail::number_list(x0["uniform"], "x0.uniform");
      if (range.size() != 2 || !(range[0] < range[1])) detail::field_error("x0.uniform", "expected [lo, hi] with lo < hi");
      std::mt19937_64 rng(sc.seed);
      std::uniform_real_distribution<double> dist(range[0], range[1]);
      sc.initial.x.resize(sc.n);
      for (auto& p : sc.initial.x) {
        p.x = dist(rng);
        p.y = dist(rng);
      }
    } else {
      sc.initial.x = detail::point_list(x0, "x0");
    }
  } else {
    sc.initial.x = sc.spec.xi;
  }
  sc.initial.gamma = doc.contains("gamma0") ? detail::number_list(doc["gamma0"], "gamma0") : std::vector<double>(sc.n, 1.0);
  sc.initial.theta = doc.contains("theta0") ? detail::number_list(doc["theta0"], "theta0") : std::vector<double>(sc.n, 0.0);

  if (doc.contains("check")) {
    const auto& c = doc["check"];
    if (!c.is_object()) detail::field_error("check", "expected an object");
    CheckSpec cs;
    for (const auto& [key, val] : c.items()) {
      const auto name = "check." + key;
      if (key == "name") {
        if (!val.is_string()) detail::field_error(name, "expected a string");
        cs.name = val.get<std::string>();
      } else if (key == "tolerance") cs.tolerance = detail::number_field(val, name);
      else if (key == "alphas") cs.alphas = detail::number_list(val, name);
      else if (key == "max_ratio") cs.max_ratio = detail::number_field(val, name);
      else if (key == "span_ratio") cs.span_ratio = detail::number_field(val, name);
      else detail::field_error(name, "unknown check field");
    }
    sc.check = cs;
  }

  detail::as_validation([&] {
    auto built = build_graph(sc.n, sc.edges);
    sc.graph = std::move(built.graph);
    sc.warnings = std::move(built.warnings);
    sc.config.validate();
    sc.spec.validate(sc.n, sc.kind);
    sc.initial.validate(sc.n);
    if (!sc.initial.all_finite()) throw Error(ErrorCode::ValidationError, "initial state is not finite");
    if (is_multiplex(sc.kind) && !sc.graph.connected()) throw Error(ErrorCode::ValidationError, "graph not connected");
    if (is_multiplex(sc.kind)) validate_discontinuities(sc.spec, sc.config);
    sc.spec.gamma_ref.check_bounds(sc.config.t_final, 2001, "gamma_ref");
    sc.spec.theta_ref.check_bounds(sc.config.t_final, 2001, "theta_ref");
    if (is_multiplex(sc.kind))
      for (auto& w : spec_warnings(sc.spec, sc.config.t_final)) sc.warnings.push_back(std::move(w));
  });
  return sc;
}

inline Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

/// Canonical JSON for a scenario; x0 is always written out explicitly.
inline std::string serialize_scenario(const Scenario& sc) {
  using detail::json;
  json edges = json::array();
  for (const auto& e : sc.edges) edges.push_back({e.i, e.j});
  json doc = {{"n", sc.n},
              {"edges", edges},
              {"kind", std::string(to_string(sc.kind))},
              {"xi", detail::points_json(sc.spec.xi)},
              {"leaders", sc.spec.leaders},
              {"gamma_ref", detail::signal_json(sc.spec.gamma_ref)},
              {"theta_ref", detail::signal_json(sc.spec.theta_ref)},
              {"alpha", sc.spec.alpha},
              {"x0", detail::points_json(sc.initial.x)},
              {"gamma0", sc.initial.gamma},
              {"theta0", sc.initial.theta},
              {"dt", sc.config.dt},
              {"t_final", sc.config.t_final},
              {"method", std::string(to_string(sc.config.method))},
              {"stride", sc.config.record_stride},
              {"seed", sc.seed}};
  if (sc.check) {
    json c = json::object();
    if (sc.check->name) c["name"] = *sc.check->name;
    if (sc.check->tolerance) c["tolerance"] = *sc.check->tolerance;
    if (!sc.check->alphas.empty()) c["alphas"] = sc.check->alphas;
    if (sc.check->max_ratio) c["max_ratio"] = *sc.check->max_ratio;
    if (sc.check->span_ratio) c["span_ratio"] = *sc.check->span_ratio;
    doc["check"] = c;
  }
  return doc.dump(2) + "\n";
}

}  // namespace formsim

#endif  // FORMSIM_SCENARIO_HPP
