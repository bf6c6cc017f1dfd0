#include "fastdiff/energy.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace fastdiff {

namespace {

double abs_pow(double v, double e) {
  const double a = std::abs(v);
  return a > 0.0 ? std::pow(a, e) : 0.0;
}

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Euclidean gradient of phi_2 with respect to the bulk unknowns of a
// trace-consistent field.
Vector phi2_gradient(const Mesh& mesh, const Vector& z, const ProblemParams& params) {
  const double k = params.alpha_pstar() + 1.0;
  Vector g = Vector::Zero(z.size());
  if (params.lambda) {
    const double e = params.alpha * params.p;
    const double c = (e + 1.0) / k;
    for (Eigen::Index i = 0; i < z.size(); ++i)
      g(i) = c * mesh.bulk_weights(i) * std::copysign(abs_pow(z(i), e), z(i));
  }
  if (params.mu) {
    const double e = params.alpha * params.q;
    const double c = (e + 1.0) / k;
    Vector gb(mesh.boundary_size());
    for (std::size_t j = 0; j < mesh.boundary_size(); ++j) {
      const double v = z(mesh.trace_map[j]);
      gb(j) = c * mesh.boundary_weights(j) * std::copysign(abs_pow(v, e), v);
    }
    mesh.add_trace_adjoint(gb, g);
  }
  return g;
}

}  // namespace

double phi2_form(const Mesh& mesh, const FieldPair& z, const ProblemParams& params) {
  check_dimensions(mesh, z);
  if (!params.has_perturbation()) return 0.0;
  double bulk = 0.0;
  double bdry = 0.0;
  if (params.lambda) {
    const double e = params.alpha * params.p + 1.0;
    for (Eigen::Index i = 0; i < z.bulk.size(); ++i)
      bulk += mesh.bulk_weights(i) * abs_pow(z.bulk(i), e);
  }
  if (params.mu) {
    const double e = params.alpha * params.q + 1.0;
    for (Eigen::Index j = 0; j < z.boundary.size(); ++j)
      bdry += mesh.boundary_weights(j) * abs_pow(z.boundary(j), e);
  }
  return (params.lambda * bulk + params.mu * bdry) / (params.alpha_pstar() + 1.0);
}

double Y_functional(const Mesh& mesh, const FieldPair& z, const ProblemParams& params) {
  check_dimensions(mesh, z);
  const double e = params.alpha + 1.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.bulk.size(); ++i)
    sum += mesh.bulk_weights(i) * abs_pow(z.bulk(i), e);
  for (Eigen::Index j = 0; j < z.boundary.size(); ++j)
    sum += mesh.boundary_weights(j) * abs_pow(z.boundary(j), e);
  return params.alpha / (params.alpha + 1.0) * sum;
}

EnergyReport evaluate(const FieldPair& z, const Mesh& mesh, const ProblemParams& params) {
  EnergyReport e;
  e.Y = Y_functional(mesh, z, params);
  e.phi1 = phi1_form(mesh, z, params);
  e.phi2 = phi2_form(mesh, z, params);
  e.J = e.phi1 - e.phi2;
  return e;
}

double lyapunov(const FieldPair& z, const Mesh& mesh, const ProblemParams& params) {
  double potential = 0.0;
  for (Eigen::Index i = 0; i < z.bulk.size(); ++i)
    potential += mesh.bulk_weights(i) * source_primitive(z.bulk(i), params, Side::Bulk);
  for (Eigen::Index j = 0; j < z.boundary.size(); ++j)
    potential += mesh.boundary_weights(j) * source_primitive(z.boundary(j), params, Side::Boundary);
  return phi1_form(mesh, z, params) - potential;
}

double sobolev_quotient(const FieldPair& z, const Mesh& mesh, const ProblemParams& params) {
  const double phi1 = phi1_form(mesh, z, params);
  if (!(phi1 > 0.0)) throw DegenerateState("quotient undefined for phi_1 = 0");
  return phi2_form(mesh, z, params) / std::pow(phi1, 0.5 * (params.alpha_pstar() + 1.0));
}

double nehari_scale(double phi1, double phi2, double alpha_pstar) {
  if (!(phi1 > 0.0) || !(phi2 > 0.0))
    throw DegenerateState("Nehari scaling needs phi_1 > 0 and phi_2 > 0");
  if (!(alpha_pstar > 1.0)) throw DegenerateState("Nehari scaling needs alpha p* > 1");
  return std::pow(2.0 * phi1 / ((alpha_pstar + 1.0) * phi2), 1.0 / (alpha_pstar - 1.0));
}

double nehari_scale(const FieldPair& z, const Mesh& mesh, const ProblemParams& params) {
  return nehari_scale(phi1_form(mesh, z, params), phi2_form(mesh, z, params),
                      params.alpha_pstar());
}

double depth_from_constant(double C, double alpha_pstar) {
  if (!(C > 0.0)) throw DegenerateState("best constant must be positive");
  if (!(alpha_pstar > 1.0)) throw DegenerateState("depth needs alpha p* > 1");
  const double k = alpha_pstar + 1.0;
  const double km = alpha_pstar - 1.0;
  return 0.5 * km * std::pow(2.0 / k, k / km) * std::pow(C, -2.0 / km);
}

std::optional<double> nehari_margin(const EnergyReport& e, const ProblemParams& params) {
  if (!(e.phi1 > 0.0)) return std::nullopt;
  return 1.0 - (params.alpha_pstar() + 1.0) * e.phi2 / (2.0 * e.phi1);
}

Vector random_bump_field(const Mesh& mesh, std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 gen(seq);
  constexpr int kModes = 3;
  struct Axis {
    double base;
    double amp[kModes];
    double shift[kModes];
  };
  auto draw_axis = [&gen] {
    Axis ax{};
    ax.base = 0.05 + 0.5 * uniform01(gen);
    for (int k = 0; k < kModes; ++k) {
      ax.amp[k] = uniform01(gen);
      ax.shift[k] = uniform01(gen);
    }
    return ax;
  };
  auto eval_axis = [](const Axis& ax, double xi) {
    double v = ax.base;
    for (int k = 0; k < kModes; ++k) {
      const double s = std::sin(std::numbers::pi * (k + 1) * (xi - ax.shift[k]));
      v += ax.amp[k] * s * s;
    }
    return v;
  };
  const Axis ax = draw_axis();
  const Axis ay = draw_axis();
  const bool two_d = mesh.kind == MeshKind::Rectangle2D;
  Vector z(mesh.bulk_size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const auto& c = mesh.coords[i];
    z(i) = eval_axis(ax, c[0]) * (two_d ? eval_axis(ay, c[1]) : 1.0);
  }
  return z;
}

WellReport estimate_best_constant(const Mesh& mesh, const ProblemParams& params,
                                  int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (!params.has_perturbation() || !(params.alpha_pstar() > 1.0))
    throw DegenerateState("best constant needs a perturbation with alpha p* > 1");

  const double k = params.alpha_pstar() + 1.0;
  const SparseMatrix A = mesh.form_operator(params.a, params.b);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw DegenerateState("phi_1 operator is not positive definite");

  auto phi1_of = [&A](const Vector& z) { return 0.5 * z.dot(A * z); };
  auto phi2_of = [&](const Vector& z) {
    return phi2_form(mesh, FieldPair::from_bulk(mesh, z), params);
  };

  WellReport well;
  well.samples = n_samples;
  well.seed = seed;
  well.C_est = -1.0;
  well.min_nehari_energy = std::numeric_limits<double>::infinity();

  for (int s = 0; s < n_samples; ++s) {
    Vector z = random_bump_field(mesh, seed, static_cast<std::uint64_t>(s));
    z /= std::sqrt(phi1_of(z));
    double Q = phi2_of(z);

    // Projected ascent on {phi_1 = 1, z >= 0} along the gradient taken in
    // the phi_1 inner product.
    for (int it = 0; it < 500; ++it) {
      const Vector grad = phi2_gradient(mesh, z, params) - 0.5 * k * Q * (A * z);
      const Vector d = ldlt.solve(grad);
      const double dnorm = std::sqrt(std::max(0.0, d.dot(A * d)));
      if (!(dnorm > 0.0)) break;
      const Vector dir = d * (std::sqrt(2.0) / dnorm);

      double tau = 0.1;
      bool improved = false;
      Vector trial;
      double Qt = Q;
      for (int ls = 0; ls < 40; ++ls, tau *= 0.5) {
        trial = (z + tau * dir).cwiseMax(0.0);
        const double p1 = phi1_of(trial);
        if (!(p1 > 0.0)) continue;
        trial /= std::sqrt(p1);
        Qt = phi2_of(trial);
        if (Qt > Q) {
          improved = true;
          break;
        }
      }
      if (!improved) break;
      const double rel = (Qt - Q) / Q;
      z = std::move(trial);
      Q = Qt;
      if (rel < 1e-8) break;
    }

    const FieldPair zp = FieldPair::from_bulk(mesh, z);
    const double q_final = sobolev_quotient(zp, mesh, params);
    if (q_final > well.C_est) well.C_est = q_final;
    const double t = nehari_scale(zp, mesh, params);
    const FieldPair scaled = FieldPair::from_bulk(mesh, t * z);
    const EnergyReport e = evaluate(scaled, mesh, params);
    well.min_nehari_energy = std::min(well.min_nehari_energy, e.J);
  }
  well.d_est = depth_from_constant(well.C_est, params.alpha_pstar());
  return well;
}

Membership stable_set_check(const FieldPair& z, const WellReport& well,
                            const Mesh& mesh, const ProblemParams& params) {
  check_dimensions(mesh, z);
  Membership m;
  const double zmin = std::min(z.bulk.size() ? z.bulk.minCoeff() : 0.0,
                               z.boundary.size() ? z.boundary.minCoeff() : 0.0);
  const double zmax = std::max(z.bulk.size() ? z.bulk.cwiseAbs().maxCoeff() : 0.0,
                               z.boundary.size() ? z.boundary.cwiseAbs().maxCoeff() : 0.0);
  m.is_zero = zmax == 0.0;
  m.nonneg = zmin >= -kTolPos;
  const EnergyReport e = evaluate(z, mesh, params);
  m.below_depth = e.J < well.d_est;
  m.nehari_strict = 2.0 * e.phi1 > (params.alpha_pstar() + 1.0) * e.phi2;
  return m;
}

}  // namespace fastdiff
