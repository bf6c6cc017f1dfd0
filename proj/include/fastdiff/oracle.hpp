#pragma once

// Independent reference solutions used to validate the stepper.

#include <stdexcept>

#include "fastdiff/grid.hpp"
#include "fastdiff/model.hpp"

namespace fastdiff::oracle {

/// Exact solution of u' = -u^m, u(0) = u0:
/// u(t) = max(0, u0^(1-m) - (1-m) t)^(1/(1-m)).
double ode_extinction(double u0, double m, double t);

/// Extinction time u0^(1-m) / (1-m) of ode_extinction.
double ode_extinction_time(double u0, double m);

/// Unique v >= 0 with v^alpha + h a v = u_prev, by bisection to 1e-14.
double scalar_step_oracle(double u_prev, double h, double a_coef, double alpha);

class LinearReferenceError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Exact state at time t of the linear (m = 1, no perturbation) coupled
/// system W v' = -A v, via eigendecomposition of W^{-1/2} A W^{-1/2}.
/// Limited to meshes with at most 200 bulk nodes.
FieldPair linear_reference(const Mesh& mesh, const ProblemParams& params,
                           const FieldPair& init, double t);

}  // namespace fastdiff::oracle
