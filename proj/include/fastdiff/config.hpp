#pragma once

// Run configuration: a line-based `key = value` format with dotted keys and
// `#` comments. Unknown keys are rejected; missing keys keep their defaults.

#include <stdexcept>
#include <string>

#include "fastdiff/grid.hpp"
#include "fastdiff/model.hpp"
#include "fastdiff/stepper.hpp"

namespace fastdiff {

struct ProblemConfig {
  double m = 0.5;
  double p = 2.0;
  double q = 2.0;
  int a = 1;
  int b = 0;
  int lambda = 0;
  int mu = 1;
  std::string mode = "power";  // power | cutoff | lipschitz
  double cutoff_M = 1.0;
  double lipschitz_L = 1.0;
  bool operator==(const ProblemConfig&) const = default;
};

struct MeshConfig {
  std::string kind = "interval";  // interval | rectangle | radial
  int n = 64;
  int nx = 16;
  int ny = 16;
  double length = 1.0;
  double length_x = 1.0;
  double length_y = 1.0;
  double radius = 1.0;
  bool operator==(const MeshConfig&) const = default;
};

struct TimeConfig {
  double dt = 1e-3;
  double t_end = 5.0;
  int output_every = 1;
  bool operator==(const TimeConfig&) const = default;
};

struct InitConfig {
  std::string kind = "bump";  // constant | bump | boundary_zero | file
  double amplitude = 0.05;
  double center = 0.5;
  double width = 1.0;
  std::string path;
  bool operator==(const InitConfig&) const = default;
};

struct SolverConfig {
  double tol = 1e-10;
  int max_iter = 100;
  bool clamp_negative = true;
  bool operator==(const SolverConfig&) const = default;
};

struct RunConfig {
  ProblemConfig problem;
  MeshConfig mesh;
  TimeConfig time;
  InitConfig init;
  SolverConfig solver;
  double eps_rel = 1e-14;
  std::string output_dir = "out";
  bool allow_trivial_ab = false;
  bool operator==(const RunConfig&) const = default;
};

class ParseError : public std::runtime_error {
public:
  ParseError(int line, const std::string& reason);
  int line;
  std::string reason;
};

class ValidationError : public std::runtime_error {
public:
  ValidationError(const std::string& key, const std::string& constraint);
  std::string key;
  std::string constraint;
};

/// Parses and validates a configuration text.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Throws ValidationError for the first violated constraint.
void validate(const RunConfig& config);

/// Emits every key in canonical order; parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& config);

ProblemParams to_params(const RunConfig& config);
MeshSpec to_mesh_spec(const RunConfig& config);
SolverOptions to_solver_options(const RunConfig& config);

/// Initial data described by config.init on the given mesh.
FieldPair make_initial(const Mesh& mesh, const InitConfig& init);

/// Snapshot text format: a `# fastdiff-state t=<t> bulk=<n> boundary=<nb>`
/// header followed by the bulk values and then the boundary values, one per
/// line.
void write_state(const std::string& path, const FieldPair& z);
/// The header time is returned in FieldPair::time.
FieldPair read_state(const std::string& path, const Mesh& mesh);

/// Shortest round-trip decimal representation used in all text outputs.
std::string format_double(double v);

}  // namespace fastdiff
