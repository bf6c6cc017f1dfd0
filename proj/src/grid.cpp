#include "fastdiff/grid.hpp"

#include <cmath>
#include <numbers>

namespace fastdiff {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Adds the flux coupling c (z_i - z_j)^2 / 2 to the stiffness triplets.
void add_edge(Triplets& t, int i, int j, double c) {
  t.emplace_back(i, i, c);
  t.emplace_back(j, j, c);
  t.emplace_back(i, j, -c);
  t.emplace_back(j, i, -c);
}

SparseMatrix assemble(int n, const Triplets& t) {
  SparseMatrix k(n, n);
  k.setFromTriplets(t.begin(), t.end());
  k.makeCompressed();
  return k;
}

// 1D trapezoid weights and stiffness on n equally spaced nodes.
void interval_parts(double length, int n, Vector& w, Triplets& k) {
  const double dx = length / (n - 1);
  w = Vector::Constant(n, dx);
  w(0) = w(n - 1) = 0.5 * dx;
  for (int i = 0; i + 1 < n; ++i) add_edge(k, i, i + 1, 1.0 / dx);
}

Mesh interval(const MeshSpec& spec) {
  if (spec.n < 2) throw MeshError("interval needs n >= 2");
  if (!(spec.length > 0.0)) throw MeshError("interval length must be positive");
  const int n = spec.n;
  Mesh mesh;
  mesh.kind = MeshKind::Interval1D;
  mesh.spec = spec;
  Triplets k;
  interval_parts(spec.length, n, mesh.bulk_weights, k);
  mesh.stiffness_bulk = assemble(n, k);
  // Two isolated endpoints: counting measure, no surface diffusion.
  mesh.boundary_weights = Vector::Ones(2);
  mesh.stiffness_boundary = SparseMatrix(2, 2);
  mesh.trace_map = {0, n - 1};
  mesh.coords.resize(n);
  for (int i = 0; i < n; ++i) mesh.coords[i] = {double(i) / (n - 1), 0.0};
  return mesh;
}

Mesh rectangle(const MeshSpec& spec) {
  if (spec.nx < 2 || spec.ny < 2) throw MeshError("rectangle needs nx, ny >= 2");
  if (!(spec.length_x > 0.0) || !(spec.length_y > 0.0))
    throw MeshError("rectangle side lengths must be positive");
  const int nx = spec.nx;
  const int ny = spec.ny;
  auto node = [nx](int i, int j) { return i + nx * j; };

  Vector wx, wy;
  Triplets kx, ky;
  interval_parts(spec.length_x, nx, wx, kx);
  interval_parts(spec.length_y, ny, wy, ky);
  const double dx = spec.length_x / (nx - 1);
  const double dy = spec.length_y / (ny - 1);

  Mesh mesh;
  mesh.kind = MeshKind::Rectangle2D;
  mesh.spec = spec;
  mesh.bulk_weights.resize(nx * ny);
  mesh.coords.resize(nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      mesh.bulk_weights(node(i, j)) = wx(i) * wy(j);
      mesh.coords[node(i, j)] = {double(i) / (nx - 1), double(j) / (ny - 1)};
    }

  // Five-point stencil K_x (x) W_y + W_x (x) K_y: an M-matrix with zero row sums.
  Triplets k;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) add_edge(k, node(i, j), node(i + 1, j), wy(j) / dx);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j + 1 < ny; ++j) add_edge(k, node(i, j), node(i, j + 1), wx(i) / dy);
  mesh.stiffness_bulk = assemble(nx * ny, k);

  // Boundary loop, counter-clockwise from the origin corner. Corners are
  // ordinary nodes of the periodic arclength Laplacian.
  std::vector<int>& loop = mesh.trace_map;
  std::vector<double> seg;  // seg[j] joins loop[j] and loop[j+1]
  for (int i = 0; i + 1 < nx; ++i) { loop.push_back(node(i, 0)); seg.push_back(dx); }
  for (int j = 0; j + 1 < ny; ++j) { loop.push_back(node(nx - 1, j)); seg.push_back(dy); }
  for (int i = nx - 1; i > 0; --i) { loop.push_back(node(i, ny - 1)); seg.push_back(dx); }
  for (int j = ny - 1; j > 0; --j) { loop.push_back(node(0, j)); seg.push_back(dy); }

  const int nb = static_cast<int>(loop.size());
  mesh.boundary_weights.resize(nb);
  Triplets kb;
  for (int j = 0; j < nb; ++j) {
    const int next = (j + 1) % nb;
    const int prev = (j + nb - 1) % nb;
    mesh.boundary_weights(j) = 0.5 * (seg[prev] + seg[j]);
    add_edge(kb, j, next, 1.0 / seg[j]);
  }
  mesh.stiffness_boundary = assemble(nb, kb);
  return mesh;
}

Mesh radial_ball(const MeshSpec& spec) {
  if (spec.n < 2) throw MeshError("radial ball needs n >= 2");
  if (!(spec.radius > 0.0)) throw MeshError("radius must be positive");
  const int n = spec.n;
  const double R = spec.radius;
  const double dr = R / (n - 1);
  constexpr double pi = std::numbers::pi;

  Mesh mesh;
  mesh.kind = MeshKind::RadialBall3D;
  mesh.spec = spec;
  mesh.bulk_weights.resize(n);
  mesh.coords.resize(n);
  // Dual cells [r_{i-1/2}, r_{i+1/2}] clipped to [0, R]; volumes telescope.
  auto face = [&](int i) { return std::clamp((i + 0.5) * dr, 0.0, R); };
  for (int i = 0; i < n; ++i) {
    const double lo = i == 0 ? 0.0 : face(i - 1);
    const double hi = i == n - 1 ? R : face(i);
    mesh.bulk_weights(i) = 4.0 * pi / 3.0 * (hi * hi * hi - lo * lo * lo);
    mesh.coords[i] = {double(i) / (n - 1), 0.0};
  }
  Triplets k;
  for (int i = 0; i + 1 < n; ++i) {
    const double rf = face(i);
    add_edge(k, i, i + 1, 4.0 * pi * rf * rf / dr);
  }
  mesh.stiffness_bulk = assemble(n, k);
  mesh.boundary_weights = Vector::Constant(1, 4.0 * pi * R * R);
  mesh.stiffness_boundary = SparseMatrix(1, 1);
  mesh.trace_map = {n - 1};
  return mesh;
}

}  // namespace

Mesh build_mesh(const MeshSpec& spec) {
  switch (spec.kind) {
    case MeshKind::Interval1D: return interval(spec);
    case MeshKind::Rectangle2D: return rectangle(spec);
    case MeshKind::RadialBall3D: return radial_ball(spec);
    case MeshKind::Custom: break;
  }
  throw MeshError("custom meshes are assembled with Mesh::custom");
}

Mesh Mesh::custom(Vector bulk_weights, Vector boundary_weights,
                  SparseMatrix stiffness_bulk, SparseMatrix stiffness_boundary,
                  std::vector<int> trace_map) {
  const auto n = bulk_weights.size();
  const auto nb = boundary_weights.size();
  if (n < 1) throw MeshError("mesh needs at least one node");
  if (stiffness_bulk.rows() != n || stiffness_bulk.cols() != n)
    throw MeshError("bulk stiffness has the wrong size");
  if (stiffness_boundary.rows() != nb || stiffness_boundary.cols() != nb)
    throw MeshError("boundary stiffness has the wrong size");
  if (static_cast<Eigen::Index>(trace_map.size()) != nb)
    throw MeshError("trace map size differs from boundary weights");
  for (int idx : trace_map)
    if (idx < 0 || idx >= n) throw MeshError("trace map index out of range");
  Mesh mesh;
  mesh.kind = MeshKind::Custom;
  mesh.spec.kind = MeshKind::Custom;
  mesh.bulk_weights = std::move(bulk_weights);
  mesh.boundary_weights = std::move(boundary_weights);
  mesh.stiffness_bulk = std::move(stiffness_bulk);
  mesh.stiffness_boundary = std::move(stiffness_boundary);
  mesh.trace_map = std::move(trace_map);
  mesh.coords.assign(n, {0.0, 0.0});
  if (n > 1)
    for (Eigen::Index i = 0; i < n; ++i) mesh.coords[i] = {double(i) / (n - 1), 0.0};
  return mesh;
}

Vector Mesh::effective_weights() const {
  Vector w = bulk_weights;
  add_trace_adjoint(boundary_weights, w);
  return w;
}

Vector Mesh::trace(const Vector& bulk) const {
  Vector out(trace_map.size());
  for (std::size_t j = 0; j < trace_map.size(); ++j) out(j) = bulk(trace_map[j]);
  return out;
}

void Mesh::add_trace_adjoint(const Vector& boundary, Vector& bulk) const {
  for (std::size_t j = 0; j < trace_map.size(); ++j) bulk(trace_map[j]) += boundary(j);
}

SparseMatrix Mesh::form_operator(int a, int b) const {
  const auto n = static_cast<int>(bulk_size());
  Triplets t;
  t.reserve(stiffness_bulk.nonZeros() + stiffness_boundary.nonZeros() + n);
  for (int k = 0; k < stiffness_bulk.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(stiffness_bulk, k); it; ++it)
      t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < stiffness_boundary.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(stiffness_boundary, k); it; ++it)
      t.emplace_back(trace_map[it.row()], trace_map[it.col()], it.value());
  // Explicit diagonal so that every row has a stored diagonal entry.
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, a * bulk_weights(i));
  for (std::size_t j = 0; j < trace_map.size(); ++j)
    t.emplace_back(trace_map[j], trace_map[j], b * boundary_weights(j));
  return assemble(n, t);
}

FieldPair FieldPair::from_bulk(const Mesh& mesh, Vector bulk, double time) {
  if (static_cast<std::size_t>(bulk.size()) != mesh.bulk_size())
    throw MeshError("bulk vector size differs from the mesh");
  FieldPair z;
  z.boundary = mesh.trace(bulk);
  z.bulk = std::move(bulk);
  z.time = time;
  return z;
}

FieldPair FieldPair::zero(const Mesh& mesh, double time) {
  return from_bulk(mesh, Vector::Zero(mesh.bulk_size()), time);
}

void check_dimensions(const Mesh& mesh, const FieldPair& z) {
  if (static_cast<std::size_t>(z.bulk.size()) != mesh.bulk_size() ||
      static_cast<std::size_t>(z.boundary.size()) != mesh.boundary_size())
    throw MeshError("field pair dimensions do not match the mesh");
}

double phi1_form(const Mesh& mesh, const FieldPair& z, const ProblemParams& params) {
  check_dimensions(mesh, z);
  const double grad_bulk = z.bulk.dot(mesh.stiffness_bulk * z.bulk);
  const double mass_bulk = mesh.bulk_weights.dot(z.bulk.cwiseAbs2());
  const double grad_bdry = z.boundary.dot(mesh.stiffness_boundary * z.boundary);
  const double mass_bdry = mesh.boundary_weights.dot(z.boundary.cwiseAbs2());
  return 0.5 * (grad_bulk + params.a * mass_bulk + grad_bdry + params.b * mass_bdry);
}

double trace_residual(const Mesh& mesh, const FieldPair& z) {
  double r = 0.0;
  const auto nb = std::min<std::size_t>(mesh.boundary_size(), z.boundary.size());
  for (std::size_t j = 0; j < nb; ++j)
    r = std::max(r, std::abs(z.boundary(j) - z.bulk(mesh.trace_map[j])));
  return r;
}

}  // namespace fastdiff
