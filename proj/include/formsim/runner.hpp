#ifndef FORMSIM_RUNNER_HPP
#define FORMSIM_RUNNER_HPP

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "formsim/analysis.hpp"
#include "formsim/dynamics.hpp"
#include "formsim/error.hpp"
#include "formsim/scenario.hpp"

namespace formsim {

inline constexpr int kExitConverged = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;

namespace detail {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// CSV: t, x1_1, x1_2, ..., xn_1, xn_2, gamma_1..gamma_n, theta_1..theta_n.
inline std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  const std::size_t n = traj.empty() ? 0 : traj.states.front().size();
  out << 't';
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i << "_1,x" << i << "_2";
  for (std::size_t i = 1; i <= n; ++i) out << ",gamma_" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",theta_" << i;
  out << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& s = traj.states[k];
    out << detail::format_g17(traj.times[k]);
    for (const auto& p : s.x) out << ',' << detail::format_g17(p.x) << ',' << detail::format_g17(p.y);
    for (double g : s.gamma) out << ',' << detail::format_g17(g);
    for (double th : s.theta) out << ',' << detail::format_g17(th);
    out << '\n';
  }
  return out.str();
}

/// Writes via a sibling temp file and rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

/// The residual `run` judges a scenario by, and its name.
struct RunMetric {
  std::string name;
  ResidualSeries series;
};

inline RunMetric run_metric(const Scenario& sc, const Trajectory& traj) {
  switch (sc.kind) {
    case ControllerKind::Consensus: return {"consensus_residual", consensus_residual(traj)};
    case ControllerKind::InvariantFormation:
      return {"formation_residual(shape)", formation_residual(traj, sc.spec, FormationMode::Shape)};
    case ControllerKind::Density:
      if (sc.spec.gamma_ref.is_constant())
        return {"formation_residual(density)", formation_residual(traj, sc.spec, FormationMode::Density)};
      return {"layered_formation_residual", layered_formation_residual(traj, sc.spec)};
    case ControllerKind::DensityOrientation:
      if (sc.spec.gamma_ref.is_constant() && sc.spec.theta_ref.is_constant())
        return {"formation_residual(density_orientation)",
                formation_residual(traj, sc.spec, FormationMode::DensityOrientation)};
      return {"layered_formation_residual", layered_formation_residual(traj, sc.spec)};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown controller kind");
}

inline std::string report_json(const Scenario& sc, const Trajectory& traj, const RunMetric& metric,
                               const ConvergenceReport& report) {
  nlohmann::json j = {
      {"kind", std::string(to_string(sc.kind))},
      {"metric", metric.name},
      {"converged", report.converged},
      {"final_residual", report.final_residual},
      {"tolerance", report.tolerance},
      {"settle_time", report.settle_time ? nlohmann::json(*report.settle_time) : nlohmann::json(nullptr)},
      {"residual_series", {{"t", report.residual_series.times}, {"residual", report.residual_series.values}}},
      {"graph_fingerprint", traj.graph_fingerprint},
      {"spec_fingerprint", traj.spec_fingerprint},
      {"warnings", sc.warnings},
  };
  return j.dump(2) + "\n";
}

struct RunResult {
  int exit_code = kExitError;
  RunMetric metric;
  ConvergenceReport report;
  Trajectory trajectory;
  std::filesystem::path trajectory_path;
  std::filesystem::path report_path;
};

/// Simulates without touching the filesystem.
inline RunResult evaluate_scenario(const Scenario& sc) {
  RunResult r;
  r.trajectory = simulate(sc.graph, sc.spec, sc.kind, sc.initial, sc.config);
  r.metric = run_metric(sc, r.trajectory);
  const double tol = sc.check && sc.check->tolerance ? *sc.check->tolerance : default_tolerance(sc.kind);
  r.report = make_report(r.metric.series, tol);
  r.exit_code = r.report.converged ? kExitConverged : kExitNotConverged;
  return r;
}

/// Simulates and writes `<stem>.trajectory.csv` and `<stem>.report.json`
/// into out_dir.
inline RunResult run_scenario(const Scenario& sc, const std::filesystem::path& out_dir, const std::string& stem) {
  RunResult r = evaluate_scenario(sc);
  r.trajectory_path = out_dir / (stem + ".trajectory.csv");
  r.report_path = out_dir / (stem + ".report.json");
  write_file_atomic(r.trajectory_path, trajectory_csv(r.trajectory));
  write_file_atomic(r.report_path, report_json(sc, r.trajectory, r.metric, r.report));
  return r;
}

inline std::vector<AlphaSweepRow> sweep_scenario(const Scenario& sc, const std::vector<double>& alphas) {
  return alpha_sweep(sc.graph, sc.spec, sc.kind, sc.initial, sc.config, alphas);
}

inline std::string sweep_table(const std::vector<AlphaSweepRow>& rows) {
  std::ostringstream out;
  const bool has_theta = !rows.empty() && rows.front().theta_error.has_value();
  out << "alpha,gamma_tail_error" << (has_theta ? ",theta_tail_error" : "") << '\n';
  for (const auto& r : rows) {
    out << detail::format_g17(r.alpha) << ',' << detail::format_g17(r.gamma_error);
    if (has_theta) out << ',' << detail::format_g17(r.theta_error.value_or(0.0));
    out << '\n';
  }
  return out.str();
}

struct CheckOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline double max_pair_span(const std::vector<Vec2>& pts) {
  double span = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) span = std::max(span, norm(pts[i] - pts[j]));
  return span;
}

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

}  // namespace detail

/// Evaluates one scenario against its `check` expectations.
inline CheckOutcome check_scenario(const Scenario& sc, const std::string& fallback_name) {
  CheckOutcome out;
  out.name = sc.check && sc.check->name ? *sc.check->name : fallback_name;
  std::ostringstream msg;
  if (sc.check && !sc.check->alphas.empty()) {
    const auto rows = sweep_scenario(sc, sc.check->alphas);
    std::vector<double> gamma_errors, theta_errors;
    for (const auto& r : rows) {
      gamma_errors.push_back(r.gamma_error);
      if (r.theta_error) theta_errors.push_back(*r.theta_error);
    }
    bool ok = detail::strictly_decreasing(gamma_errors) && detail::strictly_decreasing(theta_errors);
    msg << "gamma tail errors";
    for (double e : gamma_errors) msg << ' ' << e;
    if (!theta_errors.empty()) {
      msg << "; theta tail errors";
      for (double e : theta_errors) msg << ' ' << e;
    }
    if (sc.check->max_ratio) {
      const double limit = *sc.check->max_ratio;
      const double gr = gamma_errors.back() / gamma_errors.front();
      ok = ok && gr <= limit;
      msg << "; gamma ratio " << gr;
      if (!theta_errors.empty()) {
        const double tr = theta_errors.back() / theta_errors.front();
        ok = ok && tr <= limit;
        msg << ", theta ratio " << tr;
      }
      msg << " (limit " << limit << ")";
    }
    out.passed = ok;
  } else {
    const RunResult r = evaluate_scenario(sc);
    bool ok = r.report.converged;
    msg << r.metric.name << " final " << r.report.final_residual << " (tolerance " << r.report.tolerance << ")";
    if (sc.check && sc.check->span_ratio) {
      const double shape = detail::max_pair_span(sc.spec.xi);
      const double ratio = detail::max_pair_span(r.trajectory.final_state().x) / shape;
      ok = ok && std::abs(ratio - *sc.check->span_ratio) <= r.report.tolerance;
      msg << "; span ratio " << ratio << " (expected " << *sc.check->span_ratio << ")";
    }
    out.passed = ok;
  }
  out.detail = msg.str();
  return out;
}

/// Runs every *.json scenario in `dir` (sorted by name) and prints one
/// PASS/FAIL line per scenario. Returns 0 iff at least one scenario ran and
/// all passed.
inline int check_suite(const std::filesystem::path& dir, std::ostream& log) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_directory(dir, ec))
    for (const auto& entry : fs::directory_iterator(dir, ec))
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    log << "FAIL no scenarios found in " << dir.string() << '\n';
    return kExitError;
  }
  std::size_t failed = 0;
  for (const auto& f : files) {
    CheckOutcome o;
    try {
      o = check_scenario(load_scenario_file(f), f.stem().string());
    } catch (const std::exception& e) {
      o = {f.stem().string(), false, e.what()};
    }
    if (!o.passed) ++failed;
    log << (o.passed ? "PASS " : "FAIL ") << o.name << ": " << o.detail << '\n';
  }
  log << (files.size() - failed) << '/' << files.size() << " scenarios passed\n";
  return failed == 0 ? kExitConverged : kExitNotConverged;
}

}  // namespace formsim

#endif  // FORMSIM_RUNNER_HPP
