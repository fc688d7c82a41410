#ifndef FORMSIM_ANALYSIS_HPP
#define FORMSIM_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "formsim/controllers.hpp"
#include "formsim/dynamics.hpp"
#include "formsim/error.hpp"
#include "formsim/geometry.hpp"
#include "formsim/graph.hpp"

namespace formsim {

/// Residual values sampled at the trajectory's times.
struct ResidualSeries {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }
  double final_value() const { return values.back(); }
};

struct ConvergenceReport {
  bool converged = false;
  double final_residual = 0.0;
  ResidualSeries residual_series;
  std::optional<double> settle_time;
  double tolerance = 0.0;
};

/// Earliest sample time after which every residual is <= tol.
inline std::optional<double> settle_time(const ResidualSeries& series, double tol) {
  if (series.empty()) throw Error(ErrorCode::EmptyTrajectory, "settle_time on an empty series");
  std::optional<double> settled;
  for (std::size_t k = series.size(); k-- > 0;) {
    if (!(series.values[k] <= tol)) break;
    settled = series.times[k];
  }
  return settled;
}

inline ConvergenceReport make_report(ResidualSeries series, double tol) {
  if (series.empty()) throw Error(ErrorCode::EmptyTrajectory, "no samples to report on");
  ConvergenceReport r;
  r.tolerance = tol;
  r.final_residual = series.final_value();
  r.settle_time = settle_time(series, tol);
  r.converged = r.settle_time.has_value();
  r.residual_series = std::move(series);
  return r;
}

namespace detail {

template <typename PerSample>
ResidualSeries residual_over(const Trajectory& traj, PerSample per_sample) {
  if (traj.empty()) throw Error(ErrorCode::EmptyTrajectory, "trajectory has no samples");
  ResidualSeries out;
  out.times = traj.times;
  out.values.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) out.values.push_back(per_sample(traj.times[k], traj.states[k]));
  return out;
}

/// max over pairs i < j of ‖(x_i - x_j) - (target_i - target_j)‖.
inline double max_pair_residual(const std::vector<Vec2>& x, const std::vector<Vec2>& target) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      worst = std::max(worst, norm((x[i] - x[j]) - (target[i] - target[j])));
  return worst;
}

}  // namespace detail

/// Per sample: max_i ‖x_i(t) - x̄(0)‖ where x̄(0) is the initial centroid.
inline ResidualSeries consensus_residual(const Trajectory& traj) {
  if (traj.empty()) throw Error(ErrorCode::EmptyTrajectory, "trajectory has no samples");
  const auto& x0 = traj.states.front().x;
  Vec2 mean{};
  for (const auto& p : x0) mean += p;
  mean = (1.0 / static_cast<double>(x0.size())) * mean;
  return detail::residual_over(traj, [&](double, const MultiplexState& s) {
    double worst = 0.0;
    for (const auto& p : s.x) worst = std::max(worst, norm(p - mean));
    return worst;
  });
}

enum class FormationMode {
  Shape,               // x_i - x_j -> ξ_i - ξ_j
  Density,             // x_i - x_j -> γ (ξ_i - ξ_j)
  DensityOrientation,  // x_i - x_j -> γ R(θ) (ξ_i - ξ_j)
};

/// Pairwise distance from the asserted constant-reference limit, over all
/// pairs (not only edges).
inline ResidualSeries formation_residual(const Trajectory& traj, const FormationSpec& spec, FormationMode mode) {
  double gamma = 1.0;
  double theta = 0.0;
  if (mode != FormationMode::Shape) {
    if (!spec.gamma_ref.is_constant())
      throw Error(ErrorCode::NonConstantReference, "formation residual needs a constant gamma reference");
    gamma = spec.gamma_ref.value(0.0);
  }
  if (mode == FormationMode::DensityOrientation) {
    if (!spec.theta_ref.is_constant())
      throw Error(ErrorCode::NonConstantReference, "formation residual needs a constant theta reference");
    theta = spec.theta_ref.value(0.0);
  }
  const Rotation2 r(theta);
  std::vector<Vec2> target(spec.xi.size());
  for (std::size_t i = 0; i < target.size(); ++i)
    target[i] = mode == FormationMode::DensityOrientation ? gamma * (r * spec.xi[i]) : gamma * spec.xi[i];
  return detail::residual_over(traj, [&](double, const MultiplexState& s) {
    detail::require_length(s.x.size(), target.size(), "x");
    return detail::max_pair_residual(s.x, target);
  });
}

/// Pairwise distance from the time-varying limit x_i - x_j -> γ_i R(θ_i) ξ_i - γ_j R(θ_j) ξ_j,
/// using the agents' own layer states. R is dropped for the density law.
inline ResidualSeries layered_formation_residual(const Trajectory& traj, const FormationSpec& spec) {
  const bool rotate = traj.kind == ControllerKind::DensityOrientation;
  const bool scale = is_multiplex(traj.kind);
  return detail::residual_over(traj, [&](double, const MultiplexState& s) {
    detail::require_length(spec.xi.size(), s.size(), "xi");
    std::vector<Vec2> target(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Vec2 shape = rotate ? rotation_matrix(s.theta[i]) * spec.xi[i] : spec.xi[i];
      target[i] = scale ? s.gamma[i] * shape : shape;
    }
    return detail::max_pair_residual(s.x, target);
  });
}

enum class Layer { Gamma, Theta };

constexpr std::string_view to_string(Layer l) { return l == Layer::Gamma ? "gamma" : "theta"; }

inline bool layer_is_live(ControllerKind kind, Layer layer) {
  return layer == Layer::Gamma ? is_multiplex(kind) : kind == ControllerKind::DensityOrientation;
}

/// Per sample: max_i |layer_i(t) - reference(t)|.
inline ResidualSeries layer_tracking_error(const Trajectory& traj, const FormationSpec& spec, Layer layer) {
  if (!layer_is_live(traj.kind, layer))
    throw Error(ErrorCode::FrozenLayer, std::string(to_string(layer)) + " layer is frozen under the " +
                                            std::string(to_string(traj.kind)) + " controller");
  const ParameterSignal& ref = layer == Layer::Gamma ? spec.gamma_ref : spec.theta_ref;
  return detail::residual_over(traj, [&](double t, const MultiplexState& s) {
    const auto& values = layer == Layer::Gamma ? s.gamma : s.theta;
    const double r = ref.value(t);
    double worst = 0.0;
    for (double v : values) worst = std::max(worst, std::abs(v - r));
    return worst;
  });
}

/// Steady-state tail window: the final 20% of the horizon.
inline constexpr double kTailFraction = 0.2;

/// Supremum of the series over the final `fraction` of its time span.
inline double tail_supremum(const ResidualSeries& series, double fraction = kTailFraction) {
  if (series.empty()) throw Error(ErrorCode::EmptyTrajectory, "tail of an empty series");
  const double t0 = series.times.front();
  const double t1 = series.times.back();
  const double start = t1 - fraction * (t1 - t0);
  double sup = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k)
    if (series.times[k] >= start) sup = std::max(sup, series.values[k]);
  return sup;
}

/// Least-squares slope of ln(residual) against t over the final `fraction` of
/// the span. Non-positive samples are skipped.
inline double log_decay_slope(const ResidualSeries& series, double fraction = 0.5) {
  if (series.empty()) throw Error(ErrorCode::EmptyTrajectory, "slope of an empty series");
  const double t0 = series.times.front();
  const double t1 = series.times.back();
  const double start = t1 - fraction * (t1 - t0);
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (series.times[k] < start || !(series.values[k] > 0.0)) continue;
    const double t = series.times[k];
    const double y = std::log(series.values[k]);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++count;
  }
  if (count < 2) throw Error(ErrorCode::InvalidArgument, "need at least two positive samples to fit a slope");
  const double c = static_cast<double>(count);
  return (c * sty - st * sy) / (c * stt - st * st);
}

struct AlphaSweepRow {
  double alpha = 0.0;
  double gamma_error = 0.0;
  std::optional<double> theta_error;  // only for the three-layer law
};

/// Runs one simulation per α (in parallel) and reports the tail supremum of
/// each live layer's tracking error.
inline std::vector<AlphaSweepRow> alpha_sweep(const Graph& g, const FormationSpec& spec, ControllerKind kind,
                                              const MultiplexState& initial, const SimConfig& cfg,
                                              const std::vector<double>& alphas) {
  if (alphas.empty()) throw Error(ErrorCode::InvalidArgument, "alpha list is empty");
  for (double a : alphas)
    if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "every alpha must be positive");
  if (!layer_is_live(kind, Layer::Gamma))
    throw Error(ErrorCode::FrozenLayer, "alpha sweep needs a multiplex controller");

  std::vector<std::future<AlphaSweepRow>> jobs;
  jobs.reserve(alphas.size());
  for (double a : alphas) {
    jobs.push_back(std::async(std::launch::async, [&, a] {
      FormationSpec local = spec;
      local.alpha = a;
      const Trajectory traj = simulate(g, local, kind, initial, cfg);
      AlphaSweepRow row;
      row.alpha = a;
      row.gamma_error = tail_supremum(layer_tracking_error(traj, local, Layer::Gamma));
      if (layer_is_live(kind, Layer::Theta)) row.theta_error = tail_supremum(layer_tracking_error(traj, local, Layer::Theta));
      return row;
    }));
  }
  std::vector<AlphaSweepRow> rows;
  rows.reserve(jobs.size());
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

}  // namespace formsim

#endif  // FORMSIM_ANALYSIS_HPP
