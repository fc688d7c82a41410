// Shared fixtures for the unit and acceptance suites.
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "formsim/formsim.hpp"

namespace support {

inline formsim::Graph graph_from(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& zero_based) {
  std::vector<formsim::EdgeSpec> edges;
  for (auto [i, j] : zero_based) edges.push_back({i + 1, j + 1});
  return formsim::build_graph(n, edges).graph;
}

inline formsim::Graph graph_from(std::size_t n, std::vector<formsim::EdgeSpec> one_based) {
  return formsim::build_graph(n, one_based).graph;
}

inline formsim::Graph cycle4() { return graph_from(4, std::vector<formsim::EdgeSpec>{{1, 2}, {2, 3}, {3, 4}, {4, 1}}); }

inline std::vector<formsim::Vec2> square() { return {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}; }

/// Square shape with the given leaders and constant references.
inline formsim::FormationSpec square_spec(std::vector<int> leaders, double gamma, double theta = 0.0, double alpha = 1.0) {
  formsim::FormationSpec spec;
  spec.xi = square();
  spec.leaders = std::move(leaders);
  spec.gamma_ref = formsim::ParameterSignal::constant(gamma);
  spec.theta_ref = formsim::ParameterSignal::constant(theta);
  spec.alpha = alpha;
  return spec;
}

/// x(0) = ξ, γ_i(0) = 1, θ_i(0) = 0.
inline formsim::MultiplexState default_initial(const std::vector<formsim::Vec2>& xi) {
  formsim::MultiplexState s = formsim::MultiplexState::zeros(xi.size());
  s.x = xi;
  s.gamma.assign(xi.size(), 1.0);
  return s;
}

}  // namespace support
