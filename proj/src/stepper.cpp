#include "fastdiff/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fastdiff {

namespace {

std::string describe_nonconvergence(double residual, int iters, double time) {
  std::ostringstream os;
  os << "Newton did not converge after " << iters << " iterations (residual "
     << residual << ")";
  if (time >= 0.0) os << " at t=" << time;
  return os.str();
}

std::string describe_negativity(double min_value, double time) {
  std::ostringstream os;
  os << "state entry " << min_value << " below -" << kTolPos;
  if (time >= 0.0) os << " at t=" << time;
  return os.str();
}

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

void SolverOptions::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("solver tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("solver max_iter must be >= 1");
  if (!(shrink > 0.0 && shrink < 1.0))
    throw std::invalid_argument("line-search shrink must lie in (0, 1)");
  if (!(sufficient_decrease > 0.0 && sufficient_decrease < 0.5))
    throw std::invalid_argument("sufficient decrease must lie in (0, 0.5)");
}

NonConvergence::NonConvergence(double residual_, int iters_, double time_)
    : std::runtime_error(describe_nonconvergence(residual_, iters_, time_)),
      residual(residual_), iters(iters_), time(time_) {}

NegativityViolation::NegativityViolation(double min_value_, double time_)
    : std::runtime_error(describe_negativity(min_value_, time_)),
      min_value(min_value_), time(time_) {}

RunError::RunError(const std::string& what, double time_)
    : std::runtime_error(what), time(time_) {}

Stepper::Stepper(const Mesh& mesh, const ProblemParams& params, SolverOptions opts)
    : mesh_(&mesh), params_(params), opts_(opts),
      form_(mesh.form_operator(params.a, params.b)),
      weights_(mesh.effective_weights()) {
  opts_.validate();
}

Vector Stepper::rhs(const FieldPair& prev, double h) const {
  const Mesh& mesh = *mesh_;
  const double alpha = params_.alpha;
  Vector r(mesh.bulk_size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double u = gamma(prev.bulk(i), alpha);
    r(i) = mesh.bulk_weights(i) * (u + h * source(u, params_, Side::Bulk));
  }
  Vector rb(mesh.boundary_size());
  for (Eigen::Index j = 0; j < rb.size(); ++j) {
    const double u = gamma(prev.boundary(j), alpha);
    rb(j) = mesh.boundary_weights(j) * (u + h * source(u, params_, Side::Boundary));
  }
  mesh.add_trace_adjoint(rb, r);
  return r;
}

double Stepper::objective(const Vector& z, const Vector& r, double h) const {
  const double alpha = params_.alpha;
  double convex = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double az = std::abs(z(i));
    if (az > 0.0) convex += weights_(i) * std::pow(az, alpha + 1.0) / (alpha + 1.0);
  }
  return convex + 0.5 * h * z.dot(form_ * z) - r.dot(z);
}

Vector Stepper::gradient(const Vector& z, const Vector& r, double h) const {
  Vector g = h * (form_ * z) - r;
  for (Eigen::Index i = 0; i < z.size(); ++i) g(i) += weights_(i) * gamma(z(i), params_.alpha);
  return g;
}

StepResult Stepper::step(const FieldPair& prev, double h,
                         const std::optional<Vector>& guess) const {
  if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
  check_dimensions(*mesh_, prev);
  const double alpha = params_.alpha;
  const Vector r = rhs(prev, h);
  Vector z = guess ? *guess : prev.bulk;
  if (z.size() != r.size()) throw MeshError("initial guess has the wrong size");

  // The residual is measured per node in the units of u (gradient divided by
  // the lumped mass) and relative to the data scale, so it neither depends on
  // the mesh weights nor stalls as the state decays towards extinction.
  const Vector inv_w = weights_.cwiseInverse();
  Vector u0(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) u0(i) = gamma(z(i), alpha);
  const double scale = std::max(max_abs(r.cwiseProduct(inv_w)), max_abs(u0));
  auto scaled = [scale, &inv_w](const Vector& g) {
    const double n = max_abs(g.cwiseProduct(inv_w));
    return scale > 0.0 ? n / scale : n;
  };

  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  SparseMatrix hess = h * form_;
  ldlt.analyzePattern(hess);

  int iters = 0;
  Vector g = gradient(z, r, h);
  double res = scaled(g);
  double phi = objective(z, r, h);
  while (res > opts_.tol) {
    if (iters >= opts_.max_iter) throw NonConvergence(res, iters, prev.time + h);
    hess = h * form_;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double az = std::abs(z(i));
      const double curv = az > 0.0 ? alpha * std::pow(az, alpha - 1.0) : (alpha == 1.0 ? 1.0 : 0.0);
      hess.coeffRef(i, i) += weights_(i) * curv;
    }
    ldlt.factorize(hess);
    if (ldlt.info() != Eigen::Success) throw NonConvergence(res, iters, prev.time + h);
    const Vector dir = -ldlt.solve(g);
    const double slope = g.dot(dir);

    double tau = 1.0;
    Vector trial = z + dir;
    double phi_trial = objective(trial, r, h);
    for (int ls = 0; ls < 60; ++ls) {
      if (phi_trial <= phi + opts_.sufficient_decrease * tau * slope) break;
      // Below roundoff in Phi the Armijo test is meaningless; take the step.
      if (tau * std::abs(slope) <= 1e-14 * std::max(std::abs(phi), 1e-300)) break;
      tau *= opts_.shrink;
      trial = z + tau * dir;
      phi_trial = objective(trial, r, h);
    }
    z = std::move(trial);
    phi = phi_trial;
    g = gradient(z, r, h);
    res = scaled(g);
    ++iters;
  }

  FieldPair next;
  next.time = prev.time + h;
  const double zmin = z.size() ? z.minCoeff() : 0.0;
  if (zmin < -kTolPos) throw NegativityViolation(zmin, next.time);
  if (opts_.clamp_negative) z = z.cwiseMax(0.0);
  next = FieldPair::from_bulk(*mesh_, std::move(z), prev.time + h);

  StepResult out;
  out.newton_iters = iters;
  out.residual = res;
  out.dissipation = step_dissipation(*mesh_, prev, next, h, alpha);
  out.state = std::move(next);
  return out;
}

StepResult step(const FieldPair& prev, double h, const Mesh& mesh,
                const ProblemParams& params, const SolverOptions& opts) {
  return Stepper(mesh, params, opts).step(prev, h);
}

double step_dissipation(const Mesh& mesh, const FieldPair& prev,
                        const FieldPair& next, double h, double alpha) {
  const double l = 0.5 * (alpha + 1.0);
  auto pw = [l](double v) { return v > 0.0 ? std::pow(v, l) : 0.0; };
  double sum = 0.0;
  for (Eigen::Index i = 0; i < next.bulk.size(); ++i) {
    const double d = pw(next.bulk(i)) - pw(prev.bulk(i));
    sum += mesh.bulk_weights(i) * d * d;
  }
  for (Eigen::Index j = 0; j < next.boundary.size(); ++j) {
    const double d = pw(next.boundary(j)) - pw(prev.boundary(j));
    sum += mesh.boundary_weights(j) * d * d;
  }
  return 4.0 * alpha / ((alpha + 1.0) * (alpha + 1.0)) * sum / h;
}

Trajectory run(const FieldPair& init, double h, double t_end, const Mesh& mesh,
               const ProblemParams& params, const SolverOptions& opts,
               const std::vector<StepHook>& hooks, RunOptions run_opts) {
  if (!(h > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(t_end > 0.0)) throw std::invalid_argument("end time must be positive");
  check_dimensions(mesh, init);

  const Stepper stepper(mesh, params, opts);
  const double ratio = t_end / h;
  const long n_steps = std::max(1L, std::abs(ratio - std::round(ratio)) < 1e-9 * ratio
                                        ? std::lround(ratio)
                                        : static_cast<long>(std::ceil(ratio)));

  std::optional<double> cutoff_edge;
  if (const auto* c = std::get_if<CutoffPower>(&params.mode)) cutoff_edge = c->M + 1.0;
  auto linf = [](const FieldPair& z) { return std::max(max_abs(z.bulk), max_abs(z.boundary)); };

  Trajectory traj;
  traj.h = h;
  FieldPair current = init;
  current.time = 0.0;
  traj.times.push_back(0.0);
  traj.reports.push_back(evaluate(current, mesh, params));
  traj.states.push_back(current);
  if (cutoff_edge && linf(current) > *cutoff_edge) traj.cutoff_exit_time = 0.0;

  const double Y0 = traj.reports.front().Y;
  if (Y0 == 0.0 && run_opts.eps_ext > 0.0) {
    traj.stopped_at_extinction = true;
    return traj;
  }

  for (long k = 1; k <= n_steps; ++k) {
    StepResult res;
    try {
      res = stepper.step(current, h);
    } catch (const std::exception& e) {
      throw RunError(e.what(), static_cast<double>(k) * h);
    }
    res.state.time = static_cast<double>(k) * h;
    for (const auto& hook : hooks) hook(static_cast<std::size_t>(k - 1), current, res);

    traj.times.push_back(res.state.time);
    traj.reports.push_back(evaluate(res.state, mesh, params));
    traj.step_stats.push_back({res.newton_iters, res.residual, res.dissipation});
    if (cutoff_edge && !traj.cutoff_exit_time && linf(res.state) > *cutoff_edge)
      traj.cutoff_exit_time = res.state.time;
    current = res.state;
    traj.states.push_back(std::move(res.state));

    if (run_opts.eps_ext > 0.0 && traj.reports.back().Y < run_opts.eps_ext * Y0) {
      traj.stopped_at_extinction = true;
      break;
    }
  }
  return traj;
}

}  // namespace fastdiff
