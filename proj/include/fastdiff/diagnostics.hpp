#pragma once

// Post-processing of trajectories: energy inequality, mass identity, sup-norm
// and Hoelder bounds, extinction time and rate, stable-set invariance, and
// the ordered-part comparison of two runs. All checks are pure functions of
// their inputs.

#include <optional>
#include <utility>
#include <vector>

#include "fastdiff/energy.hpp"
#include "fastdiff/grid.hpp"
#include "fastdiff/stepper.hpp"

namespace fastdiff {

struct ExtinctionReport {
  std::optional<double> t_ext_num;
  std::optional<double> fitted_exponent;
  std::pair<double, double> fit_window{0.0, 0.0};
  double fit_r2 = 0.0;
  int fit_samples = 0;
  /// exp(intercept) of the fit; a measured prefactor, not a prediction.
  std::optional<double> fitted_prefactor;
};

/// (alpha+1)/(alpha-1) = (1+m)/(1-m); nullopt for m = 1.
std::optional<double> predicted_decay_exponent(const ProblemParams& params);

/// Per-step violations  E(v_{k+1}) + D_{k+1} - E(v_k)  of the discrete energy
/// inequality, with E = phi_1 minus the integrated source primitive.
std::vector<double> energy_violations(const Trajectory& traj, const Mesh& mesh,
                                      const ProblemParams& params);

/// Largest entry of energy_violations (0 for a single-state trajectory).
double check_energy_monotonicity(const Trajectory& traj, const Mesh& mesh,
                                 const ProblemParams& params);

/// residual_k = (Y_{k+1} - Y_k)/h + 2 phi_1(v_{k+1}) - (alpha p*+1) phi_2(v_{k+1}).
std::vector<double> mass_identity_residual(const Trajectory& traj,
                                           const ProblemParams& params);

ExtinctionReport detect_extinction(const Trajectory& traj, double eps_rel);

struct LinfReport {
  bool exponential_ok = true;  // |v(t_k)| <= e^{L t_k/alpha} B0 (1 + 1e-6)
  bool discrete_ok = true;     // |v_k|   <= (1+Lh)^{k/alpha} B0 (1 + 1e-6)
  double margin = 1.0;         // min_k 1 - |v_k| / discrete bound
  double base = 0.0;           // B0 = |v_0|_inf + |v_Gamma,0|_inf
  bool ok() const { return exponential_ok && discrete_ok; }
};

LinfReport check_linf_bound(const Trajectory& traj, const ProblemParams& params, double L);

/// max over pairs (t_i, t_j), j - i a power of two, of
/// (|v(t)-v(s)|_{w,2} + |v_G(t)-v_G(s)|_{w_G,2}) / |t-s|^{1/(alpha+1)}.
double holder_quotient(const Trajectory& traj, const Mesh& mesh, const ProblemParams& params);

enum class InvarianceStatus { Invariant, Violated, NotInitiallyMember };

struct InvarianceReport {
  InvarianceStatus status = InvarianceStatus::Invariant;
  std::optional<double> first_violation;
  std::vector<Membership> membership;           // per scanned state
  std::vector<std::optional<double>> margins;   // 1 - (a p*+1) phi_2 / (2 phi_1)
  std::size_t scanned = 0;
};

/// Scans stable-set membership along the trajectory up to (excluding) the
/// numerical extinction time `until` when given.
InvarianceReport check_invariance(const Trajectory& traj, const WellReport& well,
                                  const Mesh& mesh, const ProblemParams& params,
                                  std::optional<double> until = std::nullopt);

struct ComparisonReport {
  std::vector<double> series;  // s_k = sum w [gamma(v)-gamma(w)]^+ + boundary part
  double L = 0.0;
  bool bounded = true;         // s_k <= s_0 e^{L t_k} (1 + 1e-6)
  double max_excess = 0.0;     // max_k s_k - s_0 e^{L t_k}
};

/// Throws std::invalid_argument for mismatched grids. L defaults to
/// lipschitz_constant(params) (required when that is unbounded).
ComparisonReport compare_runs(const Trajectory& a, const Trajectory& b, const Mesh& mesh,
                              const ProblemParams& params,
                              std::optional<double> L = std::nullopt);

}  // namespace fastdiff
