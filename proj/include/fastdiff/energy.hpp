#pragma once

// Energy functionals and potential-well quantities.
//
//   Y     = a/(a+1) (sum w z^(a+1) + sum w_G z_G^(a+1))
//   phi_1 = discrete Dirichlet form with mass terms (see phi1_form)
//   phi_2 = (lambda sum w |z|^(a p+1) + mu sum w_G |z_G|^(a q+1)) / (a p* + 1)
//   J     = phi_1 - phi_2
//
// The depth of the well follows from the best constant C in
// phi_2 <= C phi_1^((a p*+1)/2), estimated here by sampled ascent.

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "fastdiff/grid.hpp"
#include "fastdiff/model.hpp"

namespace fastdiff {

struct EnergyReport {
  double Y = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
  double J = 0.0;
};

struct Membership {
  bool nonneg = false;
  bool below_depth = false;
  bool nehari_strict = false;
  bool is_zero = false;

  bool member() const { return is_zero || (nonneg && below_depth && nehari_strict); }
};

struct WellReport {
  double C_est = 0.0;
  double d_est = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
  /// min over samples of J(t* z); equals depth_from_constant(C_est).
  double min_nehari_energy = 0.0;
};

class DegenerateState : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

double phi2_form(const Mesh& mesh, const FieldPair& z, const ProblemParams& params);
double Y_functional(const Mesh& mesh, const FieldPair& z, const ProblemParams& params);

EnergyReport evaluate(const FieldPair& z, const Mesh& mesh, const ProblemParams& params);

/// phi_1 minus the integrated source primitives. Coincides with J in the
/// exact power mode; this is the functional the scheme dissipates.
double lyapunov(const FieldPair& z, const Mesh& mesh, const ProblemParams& params);

/// Q(z) = phi_2 / phi_1^((a p*+1)/2); scale invariant.
double sobolev_quotient(const FieldPair& z, const Mesh& mesh, const ProblemParams& params);

/// Unique t > 0 with 2 phi_1(t z) = (a p*+1) phi_2(t z).
double nehari_scale(const FieldPair& z, const Mesh& mesh, const ProblemParams& params);
double nehari_scale(double phi1, double phi2, double alpha_pstar);

double depth_from_constant(double C, double alpha_pstar);

/// Realized margin 1 - (a p*+1) phi_2 / (2 phi_1); nullopt when phi_1 = 0.
std::optional<double> nehari_margin(const EnergyReport& e, const ProblemParams& params);

WellReport estimate_best_constant(const Mesh& mesh, const ProblemParams& params,
                                  int n_samples, std::uint64_t seed);

/// Random nonnegative smooth field used as an ascent seed; also reused by
/// tests. Deterministic in (seed, index).
Vector random_bump_field(const Mesh& mesh, std::uint64_t seed, std::uint64_t index);

Membership stable_set_check(const FieldPair& z, const WellReport& well,
                            const Mesh& mesh, const ProblemParams& params);

}  // namespace fastdiff
