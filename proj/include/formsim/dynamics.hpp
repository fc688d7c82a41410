#ifndef FORMSIM_DYNAMICS_HPP
#define FORMSIM_DYNAMICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "formsim/controllers.hpp"
#include "formsim/error.hpp"
#include "formsim/graph.hpp"

namespace formsim {

enum class Method { Euler, RK4 };

constexpr std::string_view to_string(Method m) { return m == Method::Euler ? "euler" : "rk4"; }

inline std::optional<Method> parse_method(std::string_view s) {
  if (s == "euler") return Method::Euler;
  if (s == "rk4") return Method::RK4;
  return std::nullopt;
}

/// Any |state entry| above this aborts integration.
inline constexpr double kDivergenceLimit = 1e12;

struct SimConfig {
  double dt = 0.01;
  double t_final = 50.0;
  Method method = Method::RK4;
  std::size_t record_stride = 1;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::ValidationError, "dt must be positive");
    if (!(t_final >= dt) || !std::isfinite(t_final)) throw Error(ErrorCode::ValidationError, "t_final must be at least dt");
    if (record_stride < 1) throw Error(ErrorCode::ValidationError, "stride must be at least 1");
  }

  std::size_t step_count() const { return static_cast<std::size_t>(std::llround(t_final / dt)); }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Step discontinuities in γ(t)/θ(t) must land on the time grid so that no
/// RK4 step straddles one.
inline void validate_discontinuities(const FormationSpec& spec, const SimConfig& cfg) {
  for (const auto* sig : {&spec.gamma_ref, &spec.theta_ref}) {
    if (auto ts = sig->discontinuity()) {
      const double ratio = *ts / cfg.dt;
      if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, std::abs(ratio)))
        throw Error(ErrorCode::ValidationError,
                    "step time " + std::to_string(*ts) + " is not an integer multiple of dt=" + std::to_string(cfg.dt));
    }
  }
}

/// One explicit step of `rhs(t, state)`.
template <typename Rhs>
MultiplexState step(const Rhs& rhs, const MultiplexState& s, double t, double dt, Method method) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be positive");
  MultiplexState next;
  if (method == Method::Euler) {
    next = s.plus_scaled(dt, rhs(t, s));
  } else {
    const MultiplexState k1 = rhs(t, s);
    const MultiplexState k2 = rhs(t + 0.5 * dt, s.plus_scaled(0.5 * dt, k1));
    const MultiplexState k3 = rhs(t + 0.5 * dt, s.plus_scaled(0.5 * dt, k2));
    const MultiplexState k4 = rhs(t + dt, s.plus_scaled(dt, k3));
    next = s;
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      next.x[i] += w * (k1.x[i] + 2.0 * k2.x[i] + 2.0 * k3.x[i] + k4.x[i]);
      next.gamma[i] += w * (k1.gamma[i] + 2.0 * k2.gamma[i] + 2.0 * k3.gamma[i] + k4.gamma[i]);
      next.theta[i] += w * (k1.theta[i] + 2.0 * k2.theta[i] + 2.0 * k3.theta[i] + k4.theta[i]);
    }
  }
  if (!next.all_finite())
    throw Error(ErrorCode::NonFiniteState, "non-finite state after step from t=" + std::to_string(t));
  return next;
}

struct Trajectory {
  std::vector<double> times;
  std::vector<MultiplexState> states;
  ControllerKind kind = ControllerKind::Consensus;
  std::string graph_fingerprint;
  std::string spec_fingerprint;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
  const MultiplexState& final_state() const { return states.back(); }
};

namespace detail {

/// FNV-1a over a canonical text rendering; hex-float keeps it exact.
class Fingerprint {
 public:
  void add(std::string_view s) {
    for (unsigned char c : s) {
      hash_ ^= c;
      hash_ *= 1099511628211ULL;
    }
    add_sep();
  }
  void add(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    add(std::string_view(buf));
  }
  void add(std::size_t v) { add(std::string_view(std::to_string(v))); }

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_));
    return buf;
  }

 private:
  void add_sep() {
    hash_ ^= 0x1f;
    hash_ *= 1099511628211ULL;
  }
  std::uint64_t hash_ = 14695981039346656037ULL;
};

inline void add_signal(Fingerprint& f, const ParameterSignal& s) {
  f.add(to_string(s.kind));
  for (double v : {s.base, s.amplitude, s.frequency, s.phase, s.step_time, s.slope}) f.add(v);
  f.add(s.value_bound.value_or(-1.0));
  f.add(s.rate_bound.value_or(-1.0));
}

}  // namespace detail

inline std::string graph_fingerprint(const Graph& g) {
  detail::Fingerprint f;
  f.add(g.size());
  for (const auto& [a, b] : g.edges()) {
    f.add(a);
    f.add(b);
  }
  return f.hex();
}

inline std::string spec_fingerprint(const FormationSpec& spec) {
  detail::Fingerprint f;
  for (const auto& p : spec.xi) {
    f.add(p.x);
    f.add(p.y);
  }
  for (int k : spec.leaders) f.add(static_cast<std::size_t>(k));
  detail::add_signal(f, spec.gamma_ref);
  detail::add_signal(f, spec.theta_ref);
  f.add(spec.alpha);
  return f.hex();
}

/// Integrates the selected controller from `initial` over [0, t_final] on a
/// fixed grid t_k = k dt. Samples every `record_stride` steps; the final step
/// is always recorded.
inline Trajectory simulate(const Graph& g, const FormationSpec& spec, ControllerKind kind,
                           const MultiplexState& initial, const SimConfig& cfg) {
  cfg.validate();
  initial.validate(g.size());
  if (kind == ControllerKind::InvariantFormation) detail::require_length(spec.xi.size(), g.size(), "xi");
  if (is_multiplex(kind)) {
    spec.validate(g.size(), kind);
    if (!g.connected()) throw Error(ErrorCode::NotConnected, "graph not connected");
    validate_discontinuities(spec, cfg);
  }
  if (!initial.all_finite()) throw Error(ErrorCode::NonFiniteState, "initial state is not finite");

  std::vector<double> jumps;
  for (const auto* sig : {&spec.gamma_ref, &spec.theta_ref})
    if (auto ts = sig->discontinuity()) jumps.push_back(*ts);

  // Stages of a step that ends on a jump see the reference from the left.
  double stage_cap = std::numeric_limits<double>::infinity();
  const auto rhs = [&](double t, const MultiplexState& s) {
    return controller_rhs(kind, g, s, spec, std::min(t, stage_cap));
  };

  Trajectory traj;
  traj.kind = kind;
  traj.graph_fingerprint = graph_fingerprint(g);
  traj.spec_fingerprint = spec_fingerprint(spec);

  const std::size_t steps = cfg.step_count();
  traj.times.reserve(steps / cfg.record_stride + 2);
  traj.states.reserve(steps / cfg.record_stride + 2);
  traj.times.push_back(0.0);
  traj.states.push_back(initial);

  MultiplexState s = initial;
  for (std::size_t k = 0; k < steps; ++k) {
    double t = static_cast<double>(k) * cfg.dt;
    for (double ts : jumps)
      if (std::abs(t - ts) <= 1e-9 * cfg.dt) t = ts;
    stage_cap = std::numeric_limits<double>::infinity();
    for (double ts : jumps)
      if (std::abs(t + cfg.dt - ts) <= 1e-9 * cfg.dt) stage_cap = std::nextafter(ts, 0.0);
    try {
      s = step(rhs, s, t, cfg.dt, cfg.method);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteState) throw;
      throw Error(ErrorCode::NonFiniteState, "state blew up at t=" + std::to_string(t + cfg.dt));
    }
    if (s.max_abs_entry() > kDivergenceLimit)
      throw Error(ErrorCode::NonFiniteState, "state diverged (|entry| > 1e12) at t=" + std::to_string(t + cfg.dt));
    const std::size_t done = k + 1;
    if (done % cfg.record_stride == 0 || done == steps) {
      traj.times.push_back(static_cast<double>(done) * cfg.dt);
      traj.states.push_back(s);
    }
  }
  return traj;
}

}  // namespace formsim

#endif  // FORMSIM_DYNAMICS_HPP
