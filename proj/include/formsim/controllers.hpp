#ifndef FORMSIM_CONTROLLERS_HPP
#define FORMSIM_CONTROLLERS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "formsim/error.hpp"
#include "formsim/geometry.hpp"
#include "formsim/graph.hpp"

namespace formsim {

// ---------------------------------------------------------------------------
// Reference signals
// ---------------------------------------------------------------------------

enum class SignalKind { Constant, Step, Ramp, Sinusoid };

constexpr std::string_view to_string(SignalKind k) {
  switch (k) {
    case SignalKind::Constant: return "constant";
    case SignalKind::Step: return "step";
    case SignalKind::Ramp: return "ramp";
    case SignalKind::Sinusoid: return "sinusoid";
  }
  return "constant";
}

/// Reference parameter available to leader agents: γ(t) or θ(t).
///
///   constant: base
///   step:     base for t < step_time, base + amplitude afterwards
///   ramp:     base + slope * t
///   sinusoid: base + amplitude * sin(frequency * t + phase)
///
/// value_bound / rate_bound are the declared |value| and |rate| bounds; when
/// present, check_bounds() verifies them by sampling.
struct ParameterSignal {
  SignalKind kind = SignalKind::Constant;
  double base = 0.0;
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;
  double step_time = 0.0;
  double slope = 0.0;
  std::optional<double> value_bound;
  std::optional<double> rate_bound;

  static ParameterSignal constant(double value) {
    ParameterSignal s;
    s.base = value;
    return s;
  }
  static ParameterSignal step(double before, double jump, double at) {
    ParameterSignal s;
    s.kind = SignalKind::Step;
    s.base = before;
    s.amplitude = jump;
    s.step_time = at;
    return s;
  }
  static ParameterSignal ramp(double start, double slope) {
    ParameterSignal s;
    s.kind = SignalKind::Ramp;
    s.base = start;
    s.slope = slope;
    return s;
  }
  static ParameterSignal sinusoid(double offset, double amplitude, double frequency, double phase = 0.0) {
    ParameterSignal s;
    s.kind = SignalKind::Sinusoid;
    s.base = offset;
    s.amplitude = amplitude;
    s.frequency = frequency;
    s.phase = phase;
    return s;
  }

  double value(double t) const {
    switch (kind) {
      case SignalKind::Constant: return base;
      case SignalKind::Step: return t < step_time ? base : base + amplitude;
      case SignalKind::Ramp: return base + slope * t;
      case SignalKind::Sinusoid: return base + amplitude * std::sin(frequency * t + phase);
    }
    return base;
  }

  /// Time derivative; zero almost everywhere for a step.
  double rate(double t) const {
    switch (kind) {
      case SignalKind::Constant:
      case SignalKind::Step: return 0.0;
      case SignalKind::Ramp: return slope;
      case SignalKind::Sinusoid: return amplitude * frequency * std::cos(frequency * t + phase);
    }
    return 0.0;
  }

  /// True when the signal never changes value.
  bool is_constant() const {
    switch (kind) {
      case SignalKind::Constant: return true;
      case SignalKind::Step: return amplitude == 0.0;
      case SignalKind::Ramp: return slope == 0.0;
      case SignalKind::Sinusoid: return amplitude == 0.0 || frequency == 0.0;
    }
    return true;
  }

  std::optional<double> discontinuity() const {
    if (kind == SignalKind::Step && amplitude != 0.0) return step_time;
    return std::nullopt;
  }

  /// Samples [0, horizon] and throws ValidationError if a declared bound is
  /// exceeded.
  void check_bounds(double horizon, std::size_t samples = 2001, std::string_view name = "signal") const {
    for (std::size_t k = 0; k < samples; ++k) {
      const double t = horizon * static_cast<double>(k) / static_cast<double>(samples - 1);
      if (value_bound && std::abs(value(t)) > *value_bound)
        throw Error(ErrorCode::ValidationError, std::string(name) + " exceeds its value bound at t=" + std::to_string(t));
      if (rate_bound && std::abs(rate(t)) > *rate_bound)
        throw Error(ErrorCode::ValidationError, std::string(name) + " exceeds its rate bound at t=" + std::to_string(t));
    }
  }

  friend bool operator==(const ParameterSignal&, const ParameterSignal&) = default;
};

// ---------------------------------------------------------------------------
// Formation specification and state
// ---------------------------------------------------------------------------

enum class ControllerKind { Consensus, InvariantFormation, Density, DensityOrientation };

constexpr std::string_view to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::Consensus: return "consensus";
    case ControllerKind::InvariantFormation: return "invariant_formation";
    case ControllerKind::Density: return "density";
    case ControllerKind::DensityOrientation: return "density_orientation";
  }
  return "consensus";
}

inline std::optional<ControllerKind> parse_controller_kind(std::string_view s) {
  for (auto k : {ControllerKind::Consensus, ControllerKind::InvariantFormation, ControllerKind::Density,
                 ControllerKind::DensityOrientation})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

/// Multiplex kinds pin their layers to leaders and need a connected graph.
constexpr bool is_multiplex(ControllerKind k) {
  return k == ControllerKind::Density || k == ControllerKind::DensityOrientation;
}

struct FormationSpec {
  std::vector<Vec2> xi;        // target shape, one point per agent
  std::vector<int> leaders;    // k_i in {0, 1}
  ParameterSignal gamma_ref = ParameterSignal::constant(1.0);
  ParameterSignal theta_ref = ParameterSignal::constant(0.0);
  double alpha = 1.0;          // 1 gives the base two/three-layer laws

  std::size_t leader_count() const {
    return static_cast<std::size_t>(std::count(leaders.begin(), leaders.end(), 1));
  }

  /// Checks dimensions against n; the leader requirement only applies to
  /// multiplex kinds.
  void validate(std::size_t n, ControllerKind kind) const {
    if (xi.size() != n)
      throw Error(ErrorCode::DimensionMismatch, "xi has " + std::to_string(xi.size()) + " points, expected " + std::to_string(n));
    if (leaders.size() != n)
      throw Error(ErrorCode::DimensionMismatch,
                  "leaders has " + std::to_string(leaders.size()) + " flags, expected " + std::to_string(n));
    for (int k : leaders)
      if (k != 0 && k != 1) throw Error(ErrorCode::ValidationError, "leader flags must be 0 or 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::ValidationError, "alpha must be a positive finite gain");
    if (is_multiplex(kind) && leader_count() == 0) throw Error(ErrorCode::NoLeader, "no leader agent");
  }

  friend bool operator==(const FormationSpec&, const FormationSpec&) = default;
};

/// Non-fatal observations about a spec over [0, horizon]: currently a
/// non-positive density reference (collapse or reflection of the formation).
inline std::vector<std::string> spec_warnings(const FormationSpec& spec, double horizon, std::size_t samples = 2001) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = horizon * static_cast<double>(k) / static_cast<double>(samples - 1);
    if (spec.gamma_ref.value(t) <= 0.0) {
      out.push_back("density reference gamma(t) <= 0 at t=" + std::to_string(t) +
                    "; the formation collapses or reflects through a point");
      break;
    }
  }
  return out;
}

/// Aggregated state of all three layers. Controllers that lack a layer
/// carry it with zero derivative.
struct MultiplexState {
  std::vector<Vec2> x;
  std::vector<double> gamma;
  std::vector<double> theta;

  static MultiplexState zeros(std::size_t n) { return {std::vector<Vec2>(n), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }

  std::size_t size() const noexcept { return x.size(); }

  void validate(std::size_t n) const {
    if (x.size() != n || gamma.size() != n || theta.size() != n)
      throw Error(ErrorCode::DimensionMismatch, "state layers must all have length " + std::to_string(n));
  }

  /// Largest absolute entry across layers; NaN propagates as infinity.
  double max_abs_entry() const {
    double m = 0.0;
    auto take = [&m](double v) { m = std::isnan(v) ? std::numeric_limits<double>::infinity() : std::max(m, std::abs(v)); };
    for (const auto& p : x) {
      take(p.x);
      take(p.y);
    }
    for (double v : gamma) take(v);
    for (double v : theta) take(v);
    return m;
  }

  bool all_finite() const { return std::isfinite(max_abs_entry()); }

  /// this + scale * d, layer by layer.
  MultiplexState plus_scaled(double scale, const MultiplexState& d) const {
    MultiplexState out = *this;
    for (std::size_t i = 0; i < x.size(); ++i) {
      out.x[i] += scale * d.x[i];
      out.gamma[i] += scale * d.gamma[i];
      out.theta[i] += scale * d.theta[i];
    }
    return out;
  }

  friend bool operator==(const MultiplexState&, const MultiplexState&) = default;
};

// ---------------------------------------------------------------------------
// Control laws
// ---------------------------------------------------------------------------

namespace detail {

inline void require_length(std::size_t got, std::size_t n, std::string_view what) {
  if (got != n)
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " has length " + std::to_string(got) + ", graph has " + std::to_string(n) + " nodes");
}

inline void require_multiplex_inputs(const Graph& g, const MultiplexState& s, const FormationSpec& spec) {
  s.validate(g.size());
  detail::require_length(spec.xi.size(), g.size(), "xi");
  detail::require_length(spec.leaders.size(), g.size(), "leaders");
  if (!g.connected()) throw Error(ErrorCode::NotConnected, "graph not connected");
}

}  // namespace detail

/// u_i = -Σ_{j~i} (x_i - x_j).
inline std::vector<Vec2> consensus_rhs(const Graph& g, const std::vector<Vec2>& x) {
  detail::require_length(x.size(), g.size(), "x");
  std::vector<Vec2> dx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j : g.neighbors(i)) dx[i] -= x[i] - x[j];
  return dx;
}

/// u_i = -Σ (x_i - x_j) + Σ (ξ_i - ξ_j).
inline std::vector<Vec2> invariant_formation_rhs(const Graph& g, const std::vector<Vec2>& x, const std::vector<Vec2>& xi) {
  detail::require_length(x.size(), g.size(), "x");
  detail::require_length(xi.size(), g.size(), "xi");
  std::vector<Vec2> dx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j : g.neighbors(i)) {
      dx[i] -= x[i] - x[j];
      dx[i] += xi[i] - xi[j];
    }
  return dx;
}

/// Two-layer density law with gain α (α = 1 is the base law):
///
///   ẋ_i = -Σ(x_i - x_j) + Σ(γ_i ξ_i - γ_j ξ_j) - α ξ_i [Σ(γ_i - γ_j) + k_i(γ_i - γ)]
///   γ̇_i = -α [Σ(γ_i - γ_j) + k_i(γ_i - γ)]
///
/// The θ layer is frozen.
inline MultiplexState density_rhs(const Graph& g, const MultiplexState& s, const FormationSpec& spec, double t) {
  detail::require_multiplex_inputs(g, s, spec);
  const double gamma_ref = spec.gamma_ref.value(t);
  const std::size_t n = g.size();
  MultiplexState d = MultiplexState::zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 acc{};
    double gamma_pin = 0.0;
    for (std::size_t j : g.neighbors(i)) {
      acc -= s.x[i] - s.x[j];
      acc += s.gamma[i] * spec.xi[i] - s.gamma[j] * spec.xi[j];
      gamma_pin += s.gamma[i] - s.gamma[j];
    }
    gamma_pin += spec.leaders[i] * (s.gamma[i] - gamma_ref);
    d.x[i] = acc - (spec.alpha * gamma_pin) * spec.xi[i];
    d.gamma[i] = -(spec.alpha * gamma_pin);
  }
  return d;
}

/// Three-layer density + orientation law with gain α:
///
///   ẋ_i = -Σ(x_i - x_j) + Σ(γ_i R(θ_i) ξ_i - γ_j R(θ_j) ξ_j)
///         - α [Σ(γ_i - γ_j) + k_i(γ_i - γ)] R(θ_i) ξ_i
///         - α γ_i [Σ(θ_i - θ_j) + k_i(θ_i - θ)] Q(θ_i) ξ_i
///   γ̇_i = -α [Σ(γ_i - γ_j) + k_i(γ_i - γ)]
///   θ̇_i = -α [Σ(θ_i - θ_j) + k_i(θ_i - θ)]
///
/// θ_i is a real number; it is never wrapped.
inline MultiplexState density_orientation_rhs(const Graph& g, const MultiplexState& s, const FormationSpec& spec,
                                              double t) {
  detail::require_multiplex_inputs(g, s, spec);
  const double gamma_ref = spec.gamma_ref.value(t);
  const double theta_ref = spec.theta_ref.value(t);
  const std::size_t n = g.size();

  std::vector<Vec2> rotated(n);  // R(θ_i) ξ_i
  for (std::size_t i = 0; i < n; ++i) rotated[i] = rotation_matrix(s.theta[i]) * spec.xi[i];

  MultiplexState d = MultiplexState::zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 acc{};
    double gamma_pin = 0.0;
    double theta_pin = 0.0;
    for (std::size_t j : g.neighbors(i)) {
      acc -= s.x[i] - s.x[j];
      acc += s.gamma[i] * rotated[i] - s.gamma[j] * rotated[j];
      gamma_pin += s.gamma[i] - s.gamma[j];
      theta_pin += s.theta[i] - s.theta[j];
    }
    gamma_pin += spec.leaders[i] * (s.gamma[i] - gamma_ref);
    theta_pin += spec.leaders[i] * (s.theta[i] - theta_ref);
    const Vec2 turned = rotation_derivative(s.theta[i]) * spec.xi[i];  // Q(θ_i) ξ_i
    d.x[i] = acc - (spec.alpha * gamma_pin) * rotated[i] - (spec.alpha * s.gamma[i] * theta_pin) * turned;
    d.gamma[i] = -(spec.alpha * gamma_pin);
    d.theta[i] = -(spec.alpha * theta_pin);
  }
  return d;
}

/// Uniform dispatch over every law; layers a law does not drive get a zero
/// derivative.
inline MultiplexState controller_rhs(ControllerKind kind, const Graph& g, const MultiplexState& s,
                                     const FormationSpec& spec, double t) {
  switch (kind) {
    case ControllerKind::Consensus: {
      s.validate(g.size());
      MultiplexState d = MultiplexState::zeros(g.size());
      d.x = consensus_rhs(g, s.x);
      return d;
    }
    case ControllerKind::InvariantFormation: {
      s.validate(g.size());
      MultiplexState d = MultiplexState::zeros(g.size());
      d.x = invariant_formation_rhs(g, s.x, spec.xi);
      return d;
    }
    case ControllerKind::Density: return density_rhs(g, s, spec, t);
    case ControllerKind::DensityOrientation: return density_orientation_rhs(g, s, spec, t);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown controller kind");
}

}  // namespace formsim

#endif  // FORMSIM_CONTROLLERS_HPP
