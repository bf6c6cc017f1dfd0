#pragma once

// Discrete geometries for the coupled bulk/boundary problem.
//
// Unknowns live on bulk nodes. Boundary nodes are a subset of bulk nodes
// (trace_map), so a discrete field pair (z, z_Gamma) with z_Gamma = z|Gamma
// is determined by its bulk vector. Mass matrices are lumped (diagonal).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastdiff/model.hpp"

namespace fastdiff {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Roundoff allowance for negative entries of solver states.
inline constexpr double kTolPos = 1e-10;

enum class MeshKind { Interval1D, Rectangle2D, RadialBall3D, Custom };

struct MeshSpec {
  MeshKind kind = MeshKind::Interval1D;
  double length = 1.0;    // Interval1D
  int n = 64;             // Interval1D, RadialBall3D
  double length_x = 1.0;  // Rectangle2D
  double length_y = 1.0;
  int nx = 16;
  int ny = 16;
  double radius = 1.0;    // RadialBall3D
};

class MeshError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct Mesh {
  MeshKind kind = MeshKind::Custom;
  MeshSpec spec;
  Vector bulk_weights;
  Vector boundary_weights;
  SparseMatrix stiffness_bulk;      // -Delta, symmetric PSD, annihilates 1
  SparseMatrix stiffness_boundary;  // -Delta_Gamma on the boundary nodes
  std::vector<int> trace_map;       // boundary node j -> bulk node
  /// Node coordinates normalized to [0, 1] per axis (radial: r / R).
  std::vector<std::array<double, 2>> coords;

  std::size_t bulk_size() const { return static_cast<std::size_t>(bulk_weights.size()); }
  std::size_t boundary_size() const { return trace_map.size(); }

  /// w + T^T w_Gamma: the mass seen by each bulk unknown.
  Vector effective_weights() const;

  /// Restriction of a bulk vector to the boundary nodes.
  Vector trace(const Vector& bulk) const;

  /// Adds T^T v_Gamma into a bulk vector.
  void add_trace_adjoint(const Vector& boundary, Vector& bulk) const;

  /// Operator of the phi_1 bilinear form on bulk unknowns:
  /// K + a W + T^T (K_Gamma + b W_Gamma) T.
  SparseMatrix form_operator(int a, int b) const;

  /// Assembles a mesh from raw parts (used for degenerate test geometries).
  static Mesh custom(Vector bulk_weights, Vector boundary_weights,
                     SparseMatrix stiffness_bulk,
                     SparseMatrix stiffness_boundary,
                     std::vector<int> trace_map);
};

Mesh build_mesh(const MeshSpec& spec);

/// Coupled discrete state. The boundary part duplicates the trace of the
/// bulk part; solver-produced pairs are consistent by construction.
struct FieldPair {
  Vector bulk;
  Vector boundary;
  double time = 0.0;

  /// Pair whose boundary part is the trace of `bulk`.
  static FieldPair from_bulk(const Mesh& mesh, Vector bulk, double time = 0.0);
  static FieldPair zero(const Mesh& mesh, double time = 0.0);
};

/// phi_1 evaluated with the lumped discrete operators.
double phi1_form(const Mesh& mesh, const FieldPair& z, const ProblemParams& params);

/// max_j |z_Gamma[j] - z[trace_map[j]]|.
double trace_residual(const Mesh& mesh, const FieldPair& z);

/// Throws MeshError unless the pair has the mesh's dimensions.
void check_dimensions(const Mesh& mesh, const FieldPair& z);

}  // namespace fastdiff
