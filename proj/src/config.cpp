#include "fastdiff/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace fastdiff {

ParseError::ParseError(int line_, const std::string& reason_)
    : std::runtime_error("line " + std::to_string(line_) + ": " + reason_),
      line(line_),
      reason(reason_) {}

ValidationError::ValidationError(const std::string& key_, const std::string& constraint_)
    : std::runtime_error(key_ + ": " + constraint_), key(key_), constraint(constraint_) {}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, int line) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(out))
    throw ParseError(line, "expected a finite number, got '" + v + "'");
  return out;
}

int to_int(const std::string& v, int line) {
  int out = 0;
  const char* last = v.data() + v.size();
  auto res = std::from_chars(v.data(), last, out);
  if (res.ec != std::errc() || res.ptr != last)
    throw ParseError(line, "expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ParseError(line, "expected true or false, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, int)>;

template <class Member>
Setter set_double(Member m) {
  return [m](RunConfig& c, const std::string& v, int line) { m(c) = to_double(v, line); };
}
template <class Member>
Setter set_int(Member m) {
  return [m](RunConfig& c, const std::string& v, int line) { m(c) = to_int(v, line); };
}
template <class Member>
Setter set_bool(Member m) {
  return [m](RunConfig& c, const std::string& v, int line) { m(c) = to_bool(v, line); };
}
template <class Member>
Setter set_string(Member m) {
  return [m](RunConfig& c, const std::string& v, int) { m(c) = v; };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"problem.m", set_double([](RunConfig& c) -> double& { return c.problem.m; })},
      {"problem.p", set_double([](RunConfig& c) -> double& { return c.problem.p; })},
      {"problem.q", set_double([](RunConfig& c) -> double& { return c.problem.q; })},
      {"problem.a", set_int([](RunConfig& c) -> int& { return c.problem.a; })},
      {"problem.b", set_int([](RunConfig& c) -> int& { return c.problem.b; })},
      {"problem.lambda", set_int([](RunConfig& c) -> int& { return c.problem.lambda; })},
      {"problem.mu", set_int([](RunConfig& c) -> int& { return c.problem.mu; })},
      {"problem.mode", set_string([](RunConfig& c) -> std::string& { return c.problem.mode; })},
      {"problem.cutoff_M", set_double([](RunConfig& c) -> double& { return c.problem.cutoff_M; })},
      {"problem.lipschitz_L",
       set_double([](RunConfig& c) -> double& { return c.problem.lipschitz_L; })},
      {"mesh.kind", set_string([](RunConfig& c) -> std::string& { return c.mesh.kind; })},
      {"mesh.n", set_int([](RunConfig& c) -> int& { return c.mesh.n; })},
      {"mesh.nx", set_int([](RunConfig& c) -> int& { return c.mesh.nx; })},
      {"mesh.ny", set_int([](RunConfig& c) -> int& { return c.mesh.ny; })},
      {"mesh.length", set_double([](RunConfig& c) -> double& { return c.mesh.length; })},
      {"mesh.length_x", set_double([](RunConfig& c) -> double& { return c.mesh.length_x; })},
      {"mesh.length_y", set_double([](RunConfig& c) -> double& { return c.mesh.length_y; })},
      {"mesh.radius", set_double([](RunConfig& c) -> double& { return c.mesh.radius; })},
      {"time.dt", set_double([](RunConfig& c) -> double& { return c.time.dt; })},
      {"time.t_end", set_double([](RunConfig& c) -> double& { return c.time.t_end; })},
      {"time.output_every", set_int([](RunConfig& c) -> int& { return c.time.output_every; })},
      {"init.kind", set_string([](RunConfig& c) -> std::string& { return c.init.kind; })},
      {"init.amplitude", set_double([](RunConfig& c) -> double& { return c.init.amplitude; })},
      {"init.center", set_double([](RunConfig& c) -> double& { return c.init.center; })},
      {"init.width", set_double([](RunConfig& c) -> double& { return c.init.width; })},
      {"init.path", set_string([](RunConfig& c) -> std::string& { return c.init.path; })},
      {"solver.tol", set_double([](RunConfig& c) -> double& { return c.solver.tol; })},
      {"solver.max_iter", set_int([](RunConfig& c) -> int& { return c.solver.max_iter; })},
      {"solver.clamp_negative",
       set_bool([](RunConfig& c) -> bool& { return c.solver.clamp_negative; })},
      {"extinction.eps_rel", set_double([](RunConfig& c) -> double& { return c.eps_rel; })},
      {"output.dir", set_string([](RunConfig& c) -> std::string& { return c.output_dir; })},
      {"allow_trivial_ab", set_bool([](RunConfig& c) -> bool& { return c.allow_trivial_ab; })},
  };
  return table;
}

void require(bool ok, const std::string& key, const std::string& constraint) {
  if (!ok) throw ValidationError(key, constraint);
}

bool is_switch(int v) { return v == 0 || v == 1; }

}  // namespace

void validate(const RunConfig& c) {
  const auto& pr = c.problem;
  require(pr.m > 0.0 && pr.m <= 1.0, "problem.m", "m must lie in (0,1]");
  require(pr.p > 1.0, "problem.p", "p must exceed 1");
  require(pr.q > 1.0, "problem.q", "q must exceed 1");
  require(is_switch(pr.a), "problem.a", "a must be 0 or 1");
  require(is_switch(pr.b), "problem.b", "b must be 0 or 1");
  require(is_switch(pr.lambda), "problem.lambda", "lambda must be 0 or 1");
  require(is_switch(pr.mu), "problem.mu", "mu must be 0 or 1");
  require(pr.a + pr.b > 0, "problem.b", "(a,b) = (0,0) is not allowed");
  require(pr.lambda + pr.mu < 2, "problem.mu", "(lambda,mu) = (1,1) is not allowed");
  if (pr.a == 1 && pr.b == 1) {
    require(c.allow_trivial_ab, "problem.b", "(a,b) = (1,1) requires allow_trivial_ab = true");
    require(pr.lambda == 0 && pr.mu == 0, "problem.lambda",
            "oracle mode (a,b) = (1,1) requires lambda = mu = 0");
  }
  require(pr.mode == "power" || pr.mode == "cutoff" || pr.mode == "lipschitz", "problem.mode",
          "mode must be power, cutoff or lipschitz");
  require(pr.cutoff_M >= 0.0, "problem.cutoff_M", "M must be >= 0");
  require(pr.lipschitz_L >= 0.0, "problem.lipschitz_L", "L must be >= 0");

  const auto& me = c.mesh;
  require(me.kind == "interval" || me.kind == "rectangle" || me.kind == "radial", "mesh.kind",
          "kind must be interval, rectangle or radial");
  require(me.n >= 2, "mesh.n", "n must be >= 2");
  require(me.nx >= 2, "mesh.nx", "nx must be >= 2");
  require(me.ny >= 2, "mesh.ny", "ny must be >= 2");
  require(me.length > 0.0, "mesh.length", "length must be positive");
  require(me.length_x > 0.0, "mesh.length_x", "length_x must be positive");
  require(me.length_y > 0.0, "mesh.length_y", "length_y must be positive");
  require(me.radius > 0.0, "mesh.radius", "radius must be positive");

  require(c.time.dt > 0.0, "time.dt", "dt must be positive");
  require(c.time.t_end > 0.0, "time.t_end", "t_end must be positive");
  require(c.time.output_every >= 1, "time.output_every", "output_every must be >= 1");

  const auto& in = c.init;
  require(in.kind == "constant" || in.kind == "bump" || in.kind == "boundary_zero" ||
              in.kind == "file",
          "init.kind", "kind must be constant, bump, boundary_zero or file");
  require(in.amplitude >= 0.0, "init.amplitude", "amplitude must be >= 0");
  require(in.center >= 0.0 && in.center <= 1.0, "init.center", "center must lie in [0,1]");
  require(in.width > 0.0, "init.width", "width must be positive");
  require(in.kind != "file" || !in.path.empty(), "init.path", "file init needs a path");

  require(c.solver.tol > 0.0, "solver.tol", "tol must be positive");
  require(c.solver.max_iter >= 1, "solver.max_iter", "max_iter must be >= 1");
  require(c.eps_rel > 0.0 && c.eps_rel < 1.0, "extinction.eps_rel", "eps_rel must lie in (0,1)");
  require(!c.output_dir.empty(), "output.dir", "output directory must be non-empty");
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError(line, "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ParseError(line, "duplicate key '" + key + "'");
    if (value.empty()) throw ParseError(line, "missing value for '" + key + "'");
    it->second(c, value, line);
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(0, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const RunConfig& c) {
  std::ostringstream o;
  auto d = [&o](const char* k, double v) { o << k << " = " << format_double(v) << '\n'; };
  auto i = [&o](const char* k, int v) { o << k << " = " << v << '\n'; };
  auto s = [&o](const char* k, const std::string& v) { o << k << " = " << v << '\n'; };
  auto b = [&o](const char* k, bool v) { o << k << " = " << (v ? "true" : "false") << '\n'; };
  d("problem.m", c.problem.m);
  d("problem.p", c.problem.p);
  d("problem.q", c.problem.q);
  i("problem.a", c.problem.a);
  i("problem.b", c.problem.b);
  i("problem.lambda", c.problem.lambda);
  i("problem.mu", c.problem.mu);
  s("problem.mode", c.problem.mode);
  d("problem.cutoff_M", c.problem.cutoff_M);
  d("problem.lipschitz_L", c.problem.lipschitz_L);
  s("mesh.kind", c.mesh.kind);
  i("mesh.n", c.mesh.n);
  i("mesh.nx", c.mesh.nx);
  i("mesh.ny", c.mesh.ny);
  d("mesh.length", c.mesh.length);
  d("mesh.length_x", c.mesh.length_x);
  d("mesh.length_y", c.mesh.length_y);
  d("mesh.radius", c.mesh.radius);
  d("time.dt", c.time.dt);
  d("time.t_end", c.time.t_end);
  i("time.output_every", c.time.output_every);
  s("init.kind", c.init.kind);
  d("init.amplitude", c.init.amplitude);
  d("init.center", c.init.center);
  d("init.width", c.init.width);
  if (!c.init.path.empty()) s("init.path", c.init.path);
  d("solver.tol", c.solver.tol);
  i("solver.max_iter", c.solver.max_iter);
  b("solver.clamp_negative", c.solver.clamp_negative);
  d("extinction.eps_rel", c.eps_rel);
  s("output.dir", c.output_dir);
  b("allow_trivial_ab", c.allow_trivial_ab);
  return o.str();
}

ProblemParams to_params(const RunConfig& c) {
  const auto& pr = c.problem;
  PerturbationMode mode = PowerExact{};
  if (pr.mode == "cutoff") {
    mode = CutoffPower{pr.cutoff_M};
  } else if (pr.mode == "lipschitz") {
    // The CLI exposes the linear source f = f_Gamma = L u.
    Lipschitz lip;
    lip.L_f = lip.L_fGamma = pr.lipschitz_L;
    lip.f = lip.f_Gamma = PiecewiseLinear::linear(pr.lipschitz_L);
    mode = lip;
  }
  const bool oracle = pr.a == 1 && pr.b == 1;
  return ProblemParams::make(pr.m, pr.p, pr.q, pr.a, pr.b, pr.lambda, pr.mu, mode, oracle);
}

MeshSpec to_mesh_spec(const RunConfig& c) {
  MeshSpec s;
  if (c.mesh.kind == "interval") s.kind = MeshKind::Interval1D;
  else if (c.mesh.kind == "rectangle") s.kind = MeshKind::Rectangle2D;
  else s.kind = MeshKind::RadialBall3D;
  s.length = c.mesh.length;
  s.n = c.mesh.n;
  s.length_x = c.mesh.length_x;
  s.length_y = c.mesh.length_y;
  s.nx = c.mesh.nx;
  s.ny = c.mesh.ny;
  s.radius = c.mesh.radius;
  return s;
}

SolverOptions to_solver_options(const RunConfig& c) {
  SolverOptions o;
  o.tol = c.solver.tol;
  o.max_iter = c.solver.max_iter;
  o.clamp_negative = c.solver.clamp_negative;
  return o;
}

namespace {

double raised_cosine(double xi, double center, double width) {
  const double d = std::abs(xi - center);
  if (d >= width) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * d / width));
}

}  // namespace

FieldPair make_initial(const Mesh& mesh, const InitConfig& init) {
  const std::size_t n = mesh.bulk_size();
  Vector z(n);
  const bool two_d = mesh.kind == MeshKind::Rectangle2D;
  const double pi = std::numbers::pi;
  if (init.kind == "constant") {
    z.setConstant(init.amplitude);
    return FieldPair::from_bulk(mesh, z);
  }
  if (init.kind == "file") throw ValidationError("init.kind", "file data is read with read_state");

  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = mesh.coords[i];
    if (init.kind == "bump") {
      z(i) = raised_cosine(c[0], init.center, init.width) *
             (two_d ? raised_cosine(c[1], init.center, init.width) : 1.0);
    } else if (mesh.kind == MeshKind::RadialBall3D) {
      z(i) = std::cos(0.5 * pi * c[0]);
    } else {
      z(i) = std::sin(pi * c[0]) * (two_d ? std::sin(pi * c[1]) : 1.0);
    }
  }
  z = z.cwiseMax(0.0);
  if (init.kind == "boundary_zero")
    for (int j : mesh.trace_map) z(j) = 0.0;
  const double peak = n ? z.maxCoeff() : 0.0;
  if (peak > 0.0) z *= init.amplitude / peak;
  return FieldPair::from_bulk(mesh, z);
}

void write_state(const std::string& path, const FieldPair& z) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write state file '" + path + "'");
  f << "# fastdiff-state t=" << format_double(z.time) << " bulk=" << z.bulk.size()
    << " boundary=" << z.boundary.size() << '\n';
  for (Eigen::Index i = 0; i < z.bulk.size(); ++i) f << format_double(z.bulk(i)) << '\n';
  for (Eigen::Index j = 0; j < z.boundary.size(); ++j) f << format_double(z.boundary(j)) << '\n';
}

FieldPair read_state(const std::string& path, const Mesh& mesh) {
  std::ifstream f(path);
  if (!f) throw ValidationError("init.path", "cannot open '" + path + "'");
  std::string header;
  std::getline(f, header);
  double t = 0.0;
  long nb = -1, ng = -1;
  if (std::sscanf(header.c_str(), "# fastdiff-state t=%lf bulk=%ld boundary=%ld", &t, &nb, &ng) != 3)
    throw ValidationError("init.path", "missing fastdiff-state header");
  if (nb != static_cast<long>(mesh.bulk_size()) || ng != static_cast<long>(mesh.boundary_size()))
    throw ValidationError("init.path", "state dimensions do not match the mesh");
  FieldPair z;
  z.time = t;
  z.bulk.resize(nb);
  z.boundary.resize(ng);
  std::string tok;
  auto next = [&](double& out) {
    if (!(f >> tok)) throw ValidationError("init.path", "truncated state file");
    try {
      out = to_double(tok, 0);
    } catch (const ParseError&) {
      throw ValidationError("init.path", "non-numeric value '" + tok + "'");
    }
  };
  for (long i = 0; i < nb; ++i) next(z.bulk(i));
  for (long j = 0; j < ng; ++j) next(z.boundary(j));
  if (trace_residual(mesh, z) > 1e-12)
    throw ValidationError("init.path", "boundary values are not the trace of the bulk values");
  return z;
}

}  // namespace fastdiff
