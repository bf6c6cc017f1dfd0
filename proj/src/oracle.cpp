#include "fastdiff/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace fastdiff::oracle {

double ode_extinction(double u0, double m, double t) {
  if (u0 <= 0.0) return 0.0;
  const double base = std::pow(u0, 1.0 - m) - (1.0 - m) * t;
  if (base <= 0.0) return 0.0;
  return std::pow(base, 1.0 / (1.0 - m));
}

double ode_extinction_time(double u0, double m) {
  return std::pow(std::max(u0, 0.0), 1.0 - m) / (1.0 - m);
}

double scalar_step_oracle(double u_prev, double h, double a_coef, double alpha) {
  if (u_prev <= 0.0) return 0.0;
  auto f = [&](double v) { return std::pow(v, alpha) + h * a_coef * v - u_prev; };
  double lo = 0.0;
  double hi = std::pow(std::max(1.0, u_prev), 1.0 / alpha) + u_prev;
  // Absolute tolerance; the midpoint guard ends the loop once the bracket is
  // two adjacent doubles, which happens first for large roots.
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

FieldPair linear_reference(const Mesh& mesh, const ProblemParams& params,
                           const FieldPair& init, double t) {
  if (params.m != 1.0) throw LinearReferenceError("linear reference needs m = 1");
  if (params.has_perturbation())
    throw LinearReferenceError("linear reference needs lambda = mu = 0");
  if (mesh.bulk_size() > 200) throw LinearReferenceError("mesh too large for dense reference");
  check_dimensions(mesh, init);
  if (t == 0.0) return init;

  const Eigen::MatrixXd A(mesh.form_operator(params.a, params.b));
  const Vector w = mesh.effective_weights();
  const Vector s = w.cwiseSqrt();
  const Vector s_inv = s.cwiseInverse();
  const Eigen::MatrixXd S = s_inv.asDiagonal() * A * s_inv.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  const Eigen::MatrixXd& Q = eig.eigenvectors();
  const Vector decay = (-t * eig.eigenvalues()).array().exp();
  const Vector y0 = s.cwiseProduct(init.bulk);
  const Vector y = Q * decay.cwiseProduct(Q.transpose() * y0);
  return FieldPair::from_bulk(mesh, s_inv.cwiseProduct(y), init.time + t);
}

}  // namespace fastdiff::oracle
