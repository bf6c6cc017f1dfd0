#include "fastdiff/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fastdiff {

namespace {

double linf(const FieldPair& z) {
  double m = 0.0;
  if (z.bulk.size()) m = z.bulk.cwiseAbs().maxCoeff();
  if (z.boundary.size()) m = std::max(m, z.boundary.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

std::optional<double> predicted_decay_exponent(const ProblemParams& params) {
  if (params.alpha <= 1.0) return std::nullopt;
  return (params.alpha + 1.0) / (params.alpha - 1.0);
}

std::vector<double> energy_violations(const Trajectory& traj, const Mesh& mesh,
                                      const ProblemParams& params) {
  std::vector<double> out;
  if (traj.size() < 2) return out;
  out.reserve(traj.size() - 1);
  double prev = lyapunov(traj.states[0], mesh, params);
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double next = lyapunov(traj.states[k + 1], mesh, params);
    const double h = traj.times[k + 1] - traj.times[k];
    const double diss = step_dissipation(mesh, traj.states[k], traj.states[k + 1], h, params.alpha);
    out.push_back(next + diss - prev);
    prev = next;
  }
  return out;
}

double check_energy_monotonicity(const Trajectory& traj, const Mesh& mesh,
                                 const ProblemParams& params) {
  const auto v = energy_violations(traj, mesh, params);
  if (v.empty()) return 0.0;
  return *std::max_element(v.begin(), v.end());
}

std::vector<double> mass_identity_residual(const Trajectory& traj,
                                           const ProblemParams& params) {
  std::vector<double> out;
  const double k = params.alpha_pstar() + 1.0;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double h = traj.times[i + 1] - traj.times[i];
    const auto& next = traj.reports[i + 1];
    out.push_back((next.Y - traj.reports[i].Y) / h + 2.0 * next.phi1 - k * next.phi2);
  }
  return out;
}

ExtinctionReport detect_extinction(const Trajectory& traj, double eps_rel) {
  if (!(eps_rel > 0.0 && eps_rel < 1.0))
    throw std::invalid_argument("eps_rel must lie in (0, 1)");
  ExtinctionReport rep;
  if (traj.size() == 0) return rep;
  const double Y0 = traj.reports[0].Y;
  if (Y0 == 0.0) {
    rep.t_ext_num = traj.times[0];
    return rep;
  }
  std::size_t k_ext = traj.size();
  for (std::size_t k = 0; k < traj.size(); ++k)
    if (traj.reports[k].Y <= eps_rel * Y0) {
      k_ext = k;
      break;
    }
  if (k_ext == traj.size()) return rep;
  const double t_ext = traj.times[k_ext];
  rep.t_ext_num = t_ext;

  const double lo = 1e3 * eps_rel * Y0;
  const double hi = 1e-2 * Y0;
  std::vector<double> xs, ys;
  double t_first = 0.0, t_last = 0.0;
  for (std::size_t k = 0; k < k_ext; ++k) {
    const double Y = traj.reports[k].Y;
    if (Y < lo || Y > hi) continue;
    if (xs.empty()) t_first = traj.times[k];
    t_last = traj.times[k];
    xs.push_back(std::log(t_ext - traj.times[k]));
    ys.push_back(std::log(Y));
  }
  rep.fit_samples = static_cast<int>(xs.size());
  if (xs.empty()) return rep;
  rep.fit_window = {t_first, t_last};
  if (xs.size() < 10) return rep;

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) return rep;
  const double slope = sxy / sxx;
  rep.fitted_exponent = slope;
  rep.fitted_prefactor = std::exp(my - slope * mx);
  rep.fit_r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return rep;
}

LinfReport check_linf_bound(const Trajectory& traj, const ProblemParams& params, double L) {
  LinfReport rep;
  if (traj.size() == 0) return rep;
  const FieldPair& v0 = traj.states[0];
  rep.base = (v0.bulk.size() ? v0.bulk.cwiseAbs().maxCoeff() : 0.0) +
             (v0.boundary.size() ? v0.boundary.cwiseAbs().maxCoeff() : 0.0);
  const double slack = 1.0 + 1e-6;
  const double h = traj.h > 0.0 ? traj.h
                                : (traj.size() > 1 ? traj.times[1] - traj.times[0] : 0.0);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double sup = linf(traj.states[k]);
    const double t = traj.times[k];
    const double exp_bound = std::exp(L * t / params.alpha) * rep.base;
    const double disc_bound =
        std::pow(1.0 + L * h, static_cast<double>(k) / params.alpha) * rep.base;
    if (sup > exp_bound * slack) rep.exponential_ok = false;
    if (sup > disc_bound * slack) rep.discrete_ok = false;
    if (disc_bound > 0.0) rep.margin = std::min(rep.margin, 1.0 - sup / disc_bound);
  }
  return rep;
}

double holder_quotient(const Trajectory& traj, const Mesh& mesh, const ProblemParams& params) {
  if (traj.size() < 3) throw std::invalid_argument("Hoelder quotient needs >= 3 states");
  const double expo = 1.0 / (params.alpha + 1.0);
  double best = 0.0;
  for (std::size_t gap = 1; gap < traj.size(); gap *= 2) {
    for (std::size_t i = 0; i + gap < traj.size(); ++i) {
      const FieldPair& s = traj.states[i];
      const FieldPair& t = traj.states[i + gap];
      const double nb = std::sqrt(mesh.bulk_weights.dot((t.bulk - s.bulk).cwiseAbs2()));
      const double ng = std::sqrt(mesh.boundary_weights.dot((t.boundary - s.boundary).cwiseAbs2()));
      const double dt = std::abs(traj.times[i + gap] - traj.times[i]);
      best = std::max(best, (nb + ng) / std::pow(dt, expo));
    }
  }
  return best;
}

InvarianceReport check_invariance(const Trajectory& traj, const WellReport& well,
                                  const Mesh& mesh, const ProblemParams& params,
                                  std::optional<double> until) {
  InvarianceReport rep;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (until && traj.times[k] >= *until && k > 0) break;
    const Membership m = stable_set_check(traj.states[k], well, mesh, params);
    rep.membership.push_back(m);
    rep.margins.push_back(nehari_margin(traj.reports[k], params));
    ++rep.scanned;
    if (k == 0 && !m.member()) {
      rep.status = InvarianceStatus::NotInitiallyMember;
      return rep;
    }
    if (!m.member() && !rep.first_violation) {
      rep.status = InvarianceStatus::Violated;
      rep.first_violation = traj.times[k];
    }
  }
  return rep;
}

ComparisonReport compare_runs(const Trajectory& a, const Trajectory& b, const Mesh& mesh,
                              const ProblemParams& params, std::optional<double> L) {
  if (a.size() != b.size()) throw std::invalid_argument("trajectories differ in length");
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a.times[k] != b.times[k]) throw std::invalid_argument("trajectories use different time grids");
  ComparisonReport rep;
  if (L) {
    rep.L = *L;
  } else if (const auto l = lipschitz_constant(params)) {
    rep.L = *l;
  } else {
    throw std::invalid_argument("comparison bound needs a finite Lipschitz constant");
  }
  const double alpha = params.alpha;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const FieldPair& v = a.states[k];
    const FieldPair& w = b.states[k];
    check_dimensions(mesh, v);
    check_dimensions(mesh, w);
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.bulk.size(); ++i)
      s += mesh.bulk_weights(i) * std::max(0.0, gamma(v.bulk(i), alpha) - gamma(w.bulk(i), alpha));
    for (Eigen::Index j = 0; j < v.boundary.size(); ++j)
      s += mesh.boundary_weights(j) *
           std::max(0.0, gamma(v.boundary(j), alpha) - gamma(w.boundary(j), alpha));
    rep.series.push_back(s);
  }
  const double s0 = rep.series.empty() ? 0.0 : rep.series.front();
  for (std::size_t k = 0; k < rep.series.size(); ++k) {
    const double bound = s0 * std::exp(rep.L * a.times[k]);
    rep.max_excess = std::max(rep.max_excess, rep.series[k] - bound);
    if (rep.series[k] > bound * (1.0 + 1e-6)) rep.bounded = false;
  }
  return rep;
}

}  // namespace fastdiff
