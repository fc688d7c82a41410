#ifndef FORMSIM_FORMSIM_HPP
#define FORMSIM_FORMSIM_HPP

#include "formsim/analysis.hpp"
#include "formsim/controllers.hpp"
#include "formsim/dynamics.hpp"
#include "formsim/error.hpp"
#include "formsim/geometry.hpp"
#include "formsim/graph.hpp"
#include "formsim/runner.hpp"
#include "formsim/scenario.hpp"

#endif  // FORMSIM_FORMSIM_HPP
