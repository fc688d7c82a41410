#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "formsim/controllers.hpp"
#include "formsim/dynamics.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace formsim;

namespace {

constexpr double kPi = std::numbers::pi;

double max_diff(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, norm(a[i] - b[i]));
  return m;
}

MultiplexState random_state(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  MultiplexState s = MultiplexState::zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.x[i] = {u(rng), u(rng)};
    s.gamma[i] = u(rng);
    s.theta[i] = u(rng);
  }
  return s;
}

FormationSpec random_spec(std::size_t n, std::mt19937_64& rng, bool with_leader = true) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  FormationSpec spec;
  spec.xi.resize(n);
  for (auto& p : spec.xi) p = {u(rng), u(rng)};
  spec.leaders.assign(n, 0);
  if (with_leader) spec.leaders[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] = 1;
  spec.gamma_ref = ParameterSignal::constant(u(rng));
  spec.theta_ref = ParameterSignal::constant(u(rng));
  spec.alpha = 1.0;
  return spec;
}

}  // namespace

TEST(Rotation, Examples) {
  EXPECT_EQ(rotation_matrix(0.0).matrix(), Mat2::identity());
  const Mat2 quarter = rotation_matrix(kPi / 2).matrix();
  EXPECT_NEAR(quarter.a00, 0.0, 1e-15);
  EXPECT_EQ(quarter.a01, -1.0);
  EXPECT_EQ(quarter.a10, 1.0);
  EXPECT_NEAR(quarter.a11, 0.0, 1e-15);
  EXPECT_EQ(rotation_derivative(0.0), (Mat2{0.0, -1.0, 1.0, 0.0}));
}

TEST(Rotation, OrthogonalAndFiniteDifferenceProperties) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> angle(-20.0, 20.0);
  const double h = 1e-5;
  for (int k = 0; k < 100; ++k) {
    const double th = angle(rng);
    const Mat2 r = rotation_matrix(th).matrix();
    EXPECT_NEAR(r.det(), 1.0, 1e-12);
    EXPECT_LT(max_abs(r.transpose() * r - Mat2::identity()), 1e-12);
    const Mat2 fd = (1.0 / (2.0 * h)) * (rotation_matrix(th + h).matrix() - rotation_matrix(th - h).matrix());
    EXPECT_LT(max_abs(rotation_derivative(th) - fd), 1e-8);
    EXPECT_LT(max_abs(rotation_derivative(th) - rotation_matrix(th + kPi / 2).matrix()), 1e-12);
  }
}

TEST(Consensus, Examples) {
  const Graph two = support::graph_from(2, std::vector<EdgeSpec>{{1, 2}});
  const auto d = consensus_rhs(two, {{0, 0}, {2, 0}});
  EXPECT_EQ(d[0], (Vec2{2, 0}));
  EXPECT_EQ(d[1], (Vec2{-2, 0}));

  const Graph p3 = support::graph_from(3, std::vector<EdgeSpec>{{1, 2}, {2, 3}});
  const auto e = consensus_rhs(p3, {{0, 0}, {1, 0}, {3, 0}});
  EXPECT_EQ(e[0], (Vec2{1, 0}));
  EXPECT_EQ(e[1], (Vec2{1, 0}));
  EXPECT_EQ(e[2], (Vec2{-2, 0}));

  for (const auto& v : consensus_rhs(p3, {{4, -1}, {4, -1}, {4, -1}})) EXPECT_EQ(v, (Vec2{}));
  try {
    consensus_rhs(p3, {{0, 0}});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Consensus, MatchesKroneckerLaplacianForm) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 9)(rng);
    const auto edges = oracle::random_edges(n, 0.5, rng);
    const Graph g = support::graph_from(n, edges);
    const auto l = oracle::laplacian(n, edges);
    const auto s = random_state(n, rng);
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = s.x[i].x;
      ys[i] = s.x[i].y;
    }
    const auto lx = oracle::apply(l, xs);
    const auto ly = oracle::apply(l, ys);
    const auto d = consensus_rhs(g, s.x);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(d[i].x, -lx[i], 1e-12);
      EXPECT_NEAR(d[i].y, -ly[i], 1e-12);
    }
  }
}

TEST(InvariantFormation, Examples) {
  const Graph c4 = support::cycle4();
  const auto xi = support::square();
  for (const auto& v : invariant_formation_rhs(c4, xi, xi)) EXPECT_EQ(v, (Vec2{}));
  std::vector<Vec2> shifted = xi;
  for (auto& p : shifted) p += Vec2{3.5, -1.25};
  for (const auto& v : invariant_formation_rhs(c4, shifted, xi)) EXPECT_EQ(v, (Vec2{}));

  const Graph two = support::graph_from(2, std::vector<EdgeSpec>{{1, 2}});
  const auto d = invariant_formation_rhs(two, {{0, 0}, {0, 0}}, {{0, 0}, {1, 0}});
  EXPECT_EQ(d[0], (Vec2{-1, 0}));
  EXPECT_EQ(d[1], (Vec2{1, 0}));
  EXPECT_THROW(invariant_formation_rhs(two, {{0, 0}, {0, 0}}, {{0, 0}}), Error);
}

TEST(Density, EquilibriumIsStationary) {
  const auto spec = support::square_spec({1, 0, 0, 0}, 2.0);
  MultiplexState s = MultiplexState::zeros(4);
  for (std::size_t i = 0; i < 4; ++i) {
    s.x[i] = 2.0 * spec.xi[i] + Vec2{0.5, 7.0};
    s.gamma[i] = 2.0;
  }
  const auto d = density_rhs(support::cycle4(), s, spec, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_LT(norm(d.x[i]), 1e-14);
    EXPECT_EQ(d.gamma[i], 0.0);
    EXPECT_EQ(d.theta[i], 0.0);
  }
}

TEST(Density, SingleLeaderScalarClosedForm) {
  const Graph one = support::graph_from(1, std::vector<EdgeSpec>{});
  FormationSpec spec;
  spec.xi = {{1.0, 0.0}};
  spec.leaders = {1};
  spec.gamma_ref = ParameterSignal::constant(2.0);
  MultiplexState s = MultiplexState::zeros(1);
  s.x = {{0.0, 0.0}};
  EXPECT_EQ(density_rhs(one, s, spec, 0.0).gamma[0], 2.0);

  // γ₁(t) = 2(1 - e^{-t}).
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.t_final = 3.0;
  const auto traj = simulate(one, spec, ControllerKind::Density, s, cfg);
  for (std::size_t k = 0; k < traj.size(); ++k)
    EXPECT_NEAR(traj.states[k].gamma[0], 2.0 * (1.0 - std::exp(-traj.times[k])), 1e-9);
}

TEST(Density, TwoNodeLayerExpansion) {
  const Graph two = support::graph_from(2, std::vector<EdgeSpec>{{1, 2}});
  FormationSpec spec;
  spec.xi = {{1, 0}, {0, 1}};
  spec.leaders = {1, 0};
  spec.gamma_ref = ParameterSignal::constant(1.0);
  const auto d = density_rhs(two, MultiplexState::zeros(2), spec, 0.0);
  EXPECT_EQ(d.gamma[0], 1.0);
  EXPECT_EQ(d.gamma[1], 0.0);
}

TEST(Density, Errors) {
  const auto spec = support::square_spec({1, 0, 0, 0}, 2.0);
  const Graph split = support::graph_from(4, std::vector<EdgeSpec>{{1, 2}, {3, 4}});
  try {
    density_rhs(split, support::default_initial(spec.xi), spec, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotConnected);
  }
  try {
    density_rhs(support::cycle4(), MultiplexState::zeros(3), spec, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  EXPECT_THROW(density_orientation_rhs(split, support::default_initial(spec.xi), spec, 0.0), Error);
}

TEST(DensityOrientation, Examples) {
  const double gamma = 1.7, theta = 0.9;
  const auto spec = support::square_spec({0, 1, 0, 0}, gamma, theta);
  MultiplexState s = MultiplexState::zeros(4);
  const Rotation2 r(theta);
  for (std::size_t i = 0; i < 4; ++i) {
    s.x[i] = gamma * (r * spec.xi[i]) + Vec2{-2.0, 1.0};
    s.gamma[i] = gamma;
    s.theta[i] = theta;
  }
  const auto d = density_orientation_rhs(support::cycle4(), s, spec, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_LT(norm(d.x[i]), 1e-14);
    EXPECT_EQ(d.gamma[i], 0.0);
    EXPECT_EQ(d.theta[i], 0.0);
  }

  const Graph one = support::graph_from(1, std::vector<EdgeSpec>{});
  FormationSpec single;
  single.xi = {{1, 0}};
  single.leaders = {1};
  single.theta_ref = ParameterSignal::constant(kPi / 2);
  MultiplexState s1 = MultiplexState::zeros(1);
  s1.gamma = {1.0};
  EXPECT_DOUBLE_EQ(density_orientation_rhs(one, s1, single, 0.0).theta[0], kPi / 2);
}

// With every θ_i equal to θ the three-layer law is the density law applied
// to the rotated shape R(θ)ξ.
TEST(DensityOrientation, ReducesToDensityOnRotatedShape) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
    const Graph g = support::graph_from(n, oracle::random_connected_edges(n, 0.3, rng));
    auto spec = random_spec(n, rng);
    auto s = random_state(n, rng);
    const double theta = spec.theta_ref.value(0.0);
    s.theta.assign(n, theta);
    FormationSpec rotated = spec;
    for (auto& p : rotated.xi) p = rotation_matrix(theta) * p;
    const auto full = density_orientation_rhs(g, s, spec, 0.0);
    const auto reduced = density_rhs(g, s, rotated, 0.0);
    EXPECT_LT(max_diff(full.x, reduced.x), 1e-12);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(full.gamma[i], reduced.gamma[i], 1e-12);
  }
}

TEST(Dispatch, DelegatesTransparently) {
  std::mt19937_64 rng(3);
  const Graph g = support::cycle4();
  const auto spec = random_spec(4, rng);
  const auto s = random_state(4, rng);
  EXPECT_EQ(controller_rhs(ControllerKind::Density, g, s, spec, 0.3), density_rhs(g, s, spec, 0.3));
  EXPECT_EQ(controller_rhs(ControllerKind::DensityOrientation, g, s, spec, 0.3), density_orientation_rhs(g, s, spec, 0.3));
  const auto c = controller_rhs(ControllerKind::Consensus, g, s, spec, 0.0);
  EXPECT_EQ(c.x, consensus_rhs(g, s.x));
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(c.gamma[i], 0.0);
    EXPECT_EQ(c.theta[i], 0.0);
  }
  MultiplexState equal = MultiplexState::zeros(4);
  for (auto& p : equal.x) p = {1.5, -2.0};
  EXPECT_EQ(controller_rhs(ControllerKind::Consensus, g, equal, spec, 0.0), MultiplexState::zeros(4));
  const auto f = controller_rhs(ControllerKind::InvariantFormation, g, s, spec, 0.0);
  EXPECT_EQ(f.x, invariant_formation_rhs(g, s.x, spec.xi));
}

TEST(LawProperties, TranslationInvariance) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
    const Graph g = support::graph_from(n, oracle::random_connected_edges(n, 0.4, rng));
    const auto spec = random_spec(n, rng);
    const auto s = random_state(n, rng);
    MultiplexState moved = s;
    const Vec2 c{u(rng), u(rng)};
    for (auto& p : moved.x) p += c;
    EXPECT_LT(max_diff(consensus_rhs(g, s.x), consensus_rhs(g, moved.x)), 1e-12);
    EXPECT_LT(max_diff(invariant_formation_rhs(g, s.x, spec.xi), invariant_formation_rhs(g, moved.x, spec.xi)), 1e-12);
    EXPECT_LT(max_diff(density_rhs(g, s, spec, 0.0).x, density_rhs(g, moved, spec, 0.0).x), 1e-12);
    EXPECT_LT(max_diff(density_orientation_rhs(g, s, spec, 0.0).x, density_orientation_rhs(g, moved, spec, 0.0).x), 1e-12);
  }
}

TEST(LawProperties, LayerSumsConservedWithoutPinning) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
    const Graph g = support::graph_from(n, oracle::random_connected_edges(n, 0.4, rng));
    const auto spec = random_spec(n, rng, false);
    const auto s = random_state(n, rng);
    const auto d = density_orientation_rhs(g, s, spec, 0.0);
    double gsum = 0.0, tsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      gsum += d.gamma[i];
      tsum += d.theta[i];
    }
    EXPECT_NEAR(gsum, 0.0, 1e-12);
    EXPECT_NEAR(tsum, 0.0, 1e-12);
    double dsum = 0.0;
    for (double v : density_rhs(g, s, spec, 0.0).gamma) dsum += v;
    EXPECT_NEAR(dsum, 0.0, 1e-12);
  }
}

TEST(LawProperties, EquilibriumUnderAnyTranslation) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
    const Graph g = support::graph_from(n, oracle::random_connected_edges(n, 0.4, rng));
    const auto spec = random_spec(n, rng);
    const double gamma = spec.gamma_ref.value(0.0), theta = spec.theta_ref.value(0.0);
    const Vec2 c{u(rng), u(rng)};
    MultiplexState s = MultiplexState::zeros(n);
    for (std::size_t i = 0; i < n; ++i) {
      s.x[i] = gamma * (rotation_matrix(theta) * spec.xi[i]) + c;
      s.gamma[i] = gamma;
      s.theta[i] = theta;
    }
    EXPECT_LT(s.plus_scaled(1.0, density_orientation_rhs(g, s, spec, 0.0)).plus_scaled(-1.0, s).max_abs_entry(), 1e-12);
  }
}

TEST(LawProperties, LayerOutputIsLinearInAlpha) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
    const Graph g = support::graph_from(n, oracle::random_connected_edges(n, 0.4, rng));
    auto spec = random_spec(n, rng);
    const auto s = random_state(n, rng);
    const double alpha = std::uniform_real_distribution<double>(0.1, 20.0)(rng);
    const auto base2 = density_rhs(g, s, spec, 0.0);
    const auto base3 = density_orientation_rhs(g, s, spec, 0.0);
    spec.alpha = alpha;
    const auto scaled2 = density_rhs(g, s, spec, 0.0);
    const auto scaled3 = density_orientation_rhs(g, s, spec, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(scaled2.gamma[i], alpha * base2.gamma[i], 1e-12 * alpha * (1.0 + std::abs(base2.gamma[i])));
      EXPECT_NEAR(scaled3.gamma[i], alpha * base3.gamma[i], 1e-12 * alpha * (1.0 + std::abs(base3.gamma[i])));
      EXPECT_NEAR(scaled3.theta[i], alpha * base3.theta[i], 1e-12 * alpha * (1.0 + std::abs(base3.theta[i])));
    }
  }
}

TEST(Signals, CatalogValuesRatesAndBounds) {
  const auto c = ParameterSignal::constant(2.0);
  EXPECT_EQ(c.value(13.0), 2.0);
  EXPECT_EQ(c.rate(13.0), 0.0);
  EXPECT_TRUE(c.is_constant());

  const auto st = ParameterSignal::step(1.0, 0.5, 10.0);
  EXPECT_EQ(st.value(9.99), 1.0);
  EXPECT_EQ(st.value(10.0), 1.5);
  EXPECT_EQ(st.discontinuity().value(), 10.0);
  EXPECT_FALSE(st.is_constant());

  const auto r = ParameterSignal::ramp(1.0, 0.1);
  EXPECT_DOUBLE_EQ(r.value(5.0), 1.5);
  EXPECT_EQ(r.rate(5.0), 0.1);

  auto s = ParameterSignal::sinusoid(1.0, 0.2, 0.5);
  EXPECT_DOUBLE_EQ(s.value(kPi), 1.2);
  const double h = 1e-6;
  EXPECT_NEAR(s.rate(2.0), (s.value(2.0 + h) - s.value(2.0 - h)) / (2 * h), 1e-8);
  s.value_bound = 1.2;
  s.rate_bound = 0.1;
  EXPECT_NO_THROW(s.check_bounds(100.0));
  s.rate_bound = 0.05;
  EXPECT_THROW(s.check_bounds(100.0), Error);
}

TEST(Spec, ValidationAndWarnings) {
  auto spec = support::square_spec({0, 0, 0, 0}, 2.0);
  EXPECT_NO_THROW(spec.validate(4, ControllerKind::Consensus));
  try {
    spec.validate(4, ControllerKind::Density);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoLeader);
  }
  spec.leaders = {1, 0, 0, 0};
  spec.alpha = 0.0;
  EXPECT_THROW(spec.validate(4, ControllerKind::Density), Error);
  spec.alpha = 1.0;
  EXPECT_THROW(spec.validate(5, ControllerKind::Density), Error);
  EXPECT_TRUE(spec_warnings(spec, 50.0).empty());
  spec.gamma_ref = ParameterSignal::constant(-1.0);
  EXPECT_EQ(spec_warnings(spec, 50.0).size(), 1u);
}
