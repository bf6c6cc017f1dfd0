#pragma once

// Scalar nonlinearities and parameterization of the perturbed fast
// diffusion problem with dynamic boundary conditions.
//
// The unknown is v with u = gamma(v) = |v|^alpha sgn(v), alpha = 1/m. The
// bulk and boundary perturbations act on u, i.e. the sources are
// f(gamma(v)) and f_Gamma(gamma(v_Gamma)).

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fastdiff {

enum class Side { Bulk, Boundary };

/// Monotone piecewise-linear function given by breakpoints, extended
/// linearly past both ends with the first/last segment slopes.
class PiecewiseLinear {
public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> x, std::vector<double> y);

  /// f(u) = slope * u.
  static PiecewiseLinear linear(double slope);

  double operator()(double u) const;
  double max_slope() const;

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }

  /// Integral of f(gamma(s)) over s in [0, r] for gamma(s) = |s|^alpha sgn s.
  double primitive_of_composition(double r, double alpha) const;

private:
  std::size_t segment(double u) const;

  std::vector<double> x_;
  std::vector<double> y_;
};

struct PowerExact {};

struct CutoffPower {
  double M = 0.0;
};

struct Lipschitz {
  double L_f = 0.0;
  double L_fGamma = 0.0;
  PiecewiseLinear f;
  PiecewiseLinear f_Gamma;
};

using PerturbationMode = std::variant<PowerExact, CutoffPower, Lipschitz>;

/// Exponents, coefficient switches and perturbation mode.
///
/// (a, b) and (lambda, mu) are 0/1 switches. Admissible choices are
/// (a, b) in {(1,0), (0,1)} and (lambda, mu) in {(1,0), (0,1), (0,0)}.
/// The trivial pair (a, b) = (1, 1) is accepted only with `oracle = true`
/// and lambda = mu = 0.
struct ProblemParams {
  double m = 0.5;
  double alpha = 2.0;
  double p = 2.0;
  double q = 2.0;
  double p_star = 0.0;
  int a = 1;
  int b = 0;
  int lambda = 0;
  int mu = 1;
  PerturbationMode mode = PowerExact{};
  bool oracle = false;

  /// Validates and fills the derived fields alpha and p_star.
  static ProblemParams make(double m, double p, double q, int a, int b,
                            int lambda, int mu,
                            PerturbationMode mode = PowerExact{},
                            bool oracle = false);

  /// alpha * p_star; the homogeneity degree of phi_2 is this plus one.
  double alpha_pstar() const { return alpha * p_star; }

  bool has_perturbation() const { return lambda != 0 || mu != 0; }

  double exponent(Side side) const { return side == Side::Bulk ? p : q; }
};

class ParamError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

double gamma(double r, double alpha);
double beta(double u, double alpha);

/// Raw perturbation g (bulk) or g_Gamma (boundary) in the selected mode,
/// evaluated at u. The lambda/mu switches are not applied here.
double perturbation(double u, const ProblemParams& params, Side side);

/// Perturbation as it enters the equation: lambda*g / mu*g_Gamma for the
/// power modes, the tables themselves for Lipschitz mode.
double source(double u, const ProblemParams& params, Side side);

/// Integral over [0, r] of perturbation(gamma(s)) ds (switches not applied).
double primitive_f_gamma(double r, const ProblemParams& params, Side side);

/// Primitive of source(gamma(s)); the potential of the perturbation term.
double source_primitive(double r, const ProblemParams& params, Side side);

/// Global Lipschitz constant max{L_f, L_fGamma} of the sources in the u
/// variable; 0 without perturbation, nullopt for unbounded power growth.
std::optional<double> lipschitz_constant(const ProblemParams& params);

/// The three elementary inequalities for r, s >= 0 and alpha >= 1:
/// (i) 4a/(a+1)^2 (r^l - s^l)^2 <= (r^a - s^a)(r - s),
/// (ii) |r^a - s^a| <= 2a/(a+1) max{r,s}^((a-1)/2) |r^l - s^l|,
/// (iii) |r - s| <= |r^l - s^l|^(1/l), with l = (a+1)/2.
std::array<bool, 3> check_fundamental_inequalities(double r, double s,
                                                   double alpha);

}  // namespace fastdiff
