#pragma once

// Implicit time stepping of the coupled fast diffusion system.
//
// One step from v_prev with step h minimizes the strictly convex functional
//
//   Phi(z) = sum_i W_i B(z_i) + h phi_1(z) - <r, z>,   B(s) = |s|^(a+1)/(a+1),
//
// where W = w + T^T w_Gamma is the lumped mass seen by each bulk unknown and
// r = w (gamma(v_prev) + h f(gamma(v_prev))) + T^T w_Gamma (same on Gamma).
// Its stationarity condition W gamma(z) + h A z = r is the lumped-mass
// discretization of the scheme with lagged perturbation.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "fastdiff/energy.hpp"
#include "fastdiff/grid.hpp"
#include "fastdiff/model.hpp"

namespace fastdiff {

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 100;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  bool clamp_negative = true;

  void validate() const;
};

struct StepResult {
  FieldPair state;
  int newton_iters = 0;
  double residual = 0.0;     // scaled max-norm of grad Phi at the returned state
  double dissipation = 0.0;  // 4a/(a+1)^2 sum w (v^l - v_prev^l)^2 / h, both parts
};

class NonConvergence : public std::runtime_error {
public:
  NonConvergence(double residual, int iters, double time = -1.0);
  double residual;
  int iters;
  double time;
};

class NegativityViolation : public std::runtime_error {
public:
  NegativityViolation(double min_value, double time = -1.0);
  double min_value;
  double time;
};

/// Reusable per-step solver for one mesh and parameter set.
class Stepper {
public:
  Stepper(const Mesh& mesh, const ProblemParams& params, SolverOptions opts = {});

  /// Advances `prev` by h. `guess` overrides the Newton starting point
  /// (default: prev.bulk).
  StepResult step(const FieldPair& prev, double h,
                  const std::optional<Vector>& guess = std::nullopt) const;

  /// Right-hand side r of the stationarity system for a given previous state.
  Vector rhs(const FieldPair& prev, double h) const;

  /// Phi and its gradient; exposed for tests.
  double objective(const Vector& z, const Vector& r, double h) const;
  Vector gradient(const Vector& z, const Vector& r, double h) const;

  const Mesh& mesh() const { return *mesh_; }
  const ProblemParams& params() const { return params_; }
  const SolverOptions& options() const { return opts_; }

private:
  const Mesh* mesh_;
  ProblemParams params_;
  SolverOptions opts_;
  SparseMatrix form_;  // A
  Vector weights_;     // W
};

StepResult step(const FieldPair& prev, double h, const Mesh& mesh,
                const ProblemParams& params, const SolverOptions& opts = {});

/// Dissipation term of the discrete energy inequality for one step.
double step_dissipation(const Mesh& mesh, const FieldPair& prev,
                        const FieldPair& next, double h, double alpha);

struct StepStats {
  int newton_iters = 0;
  double residual = 0.0;
  double dissipation = 0.0;
};

struct Trajectory {
  double h = 0.0;
  std::vector<double> times;
  std::vector<FieldPair> states;
  std::vector<EnergyReport> reports;
  std::vector<StepStats> step_stats;  // step_stats[k] produced states[k + 1]
  /// CutoffPower only: first time with |v|_inf > M + 1.
  std::optional<double> cutoff_exit_time;
  bool stopped_at_extinction = false;

  std::size_t size() const { return states.size(); }
};

struct RunOptions {
  /// Stop once Y(state) < eps_ext * Y(init); <= 0 disables early stopping.
  double eps_ext = 1e-14;
};

/// Called after every accepted step with (step index, previous state, result).
using StepHook = std::function<void(std::size_t, const FieldPair&, const StepResult&)>;

/// Error raised by run(); wraps the step failure with its time.
class RunError : public std::runtime_error {
public:
  RunError(const std::string& what, double time);
  double time;
};

Trajectory run(const FieldPair& init, double h, double t_end, const Mesh& mesh,
               const ProblemParams& params, const SolverOptions& opts = {},
               const std::vector<StepHook>& hooks = {}, RunOptions run_opts = {});

}  // namespace fastdiff
