#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "fastdiff/config.hpp"

using namespace fastdiff;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("fastdiff_test_config_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

template <class F>
int parse_error_line(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line;
  }
  return -1;
}

std::string validation_key(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.key;
  }
  return "";
}

RunConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  RunConfig c;
  c.problem.m = 0.05 + 0.95 * U(rng);
  c.problem.p = 1.0 + 4.0 * U(rng) + 1e-9;
  c.problem.q = 1.0 + 4.0 * U(rng) + 1e-9;
  const int ab = pick(2);
  c.problem.a = ab;
  c.problem.b = 1 - ab;
  const int lm = pick(3);
  c.problem.lambda = lm == 1;
  c.problem.mu = lm == 2;
  c.problem.mode = std::array{"power", "cutoff", "lipschitz"}[pick(3)];
  c.problem.cutoff_M = 5.0 * U(rng);
  c.problem.lipschitz_L = 5.0 * U(rng);
  c.mesh.kind = std::array{"interval", "rectangle", "radial"}[pick(3)];
  c.mesh.n = 2 + pick(500);
  c.mesh.nx = 2 + pick(50);
  c.mesh.ny = 2 + pick(50);
  c.mesh.length = 0.1 + U(rng);
  c.mesh.length_x = 0.1 + U(rng);
  c.mesh.length_y = 0.1 + U(rng);
  c.mesh.radius = 0.1 + U(rng);
  c.time.dt = 1e-6 + 1e-2 * U(rng);
  c.time.t_end = 0.1 + 10.0 * U(rng);
  c.time.output_every = 1 + pick(100);
  c.init.kind = std::array{"constant", "bump", "boundary_zero", "file"}[pick(4)];
  c.init.amplitude = U(rng);
  c.init.center = U(rng);
  c.init.width = 0.01 + U(rng);
  c.init.path = c.init.kind == "file" ? "state_" + std::to_string(pick(1000)) + ".txt" : "";
  c.solver.tol = std::pow(10.0, -14.0 + 8.0 * U(rng));
  c.solver.max_iter = 1 + pick(500);
  c.solver.clamp_negative = pick(2) == 1;
  c.eps_rel = std::pow(10.0, -15.0 + 14.0 * U(rng));
  c.output_dir = "run_" + std::to_string(pick(100000));
  return c;
}

Mesh interval(int n) {
  MeshSpec s;
  s.kind = MeshKind::Interval1D;
  s.n = n;
  return build_mesh(s);
}

}  // namespace

TEST(ParseConfig, MinimalExampleTakesDefaults) {
  const RunConfig c =
      parse_config("problem.m = 0.5\nmesh.kind = interval\nmesh.n = 64\ntime.dt = 1e-3\ntime.t_end = 5");
  EXPECT_EQ(c, RunConfig{});
  EXPECT_EQ(c.problem.m, 0.5);
  EXPECT_EQ(c.mesh.n, 64);
  EXPECT_EQ(c.time.dt, 1e-3);
  EXPECT_EQ(c.time.t_end, 5.0);
}

TEST(ParseConfig, EmptyTextIsDefault) { EXPECT_EQ(parse_config(""), RunConfig{}); }

TEST(ParseConfig, CommentsAndWhitespace) {
  const RunConfig c = parse_config("# header\n\n   problem.p = 3   # trailing\n\tmesh.n=10\n");
  EXPECT_EQ(c.problem.p, 3.0);
  EXPECT_EQ(c.mesh.n, 10);
}

TEST(ParseConfig, ExponentOutOfRange) {
  EXPECT_EQ(validation_key("problem.m = 1.5"), "problem.m");
  EXPECT_EQ(validation_key("problem.m = 0"), "problem.m");
  EXPECT_EQ(validation_key("problem.m = 1"), "");
  EXPECT_EQ(validation_key("problem.p = 1"), "problem.p");
}

TEST(ParseConfig, TrivialCoefficientsNeedFlag) {
  EXPECT_NE(validation_key("problem.a = 1\nproblem.b = 1"), "");
  EXPECT_EQ(validation_key("problem.a = 1\nproblem.b = 1\nproblem.mu = 0\nallow_trivial_ab = true"), "");
  EXPECT_NE(validation_key("problem.a = 1\nproblem.b = 1\nallow_trivial_ab = true"), "");
  EXPECT_NE(validation_key("problem.a = 0\nproblem.b = 0"), "");
  EXPECT_NE(validation_key("problem.lambda = 1\nproblem.mu = 1"), "");
}

TEST(ParseConfig, OtherValidationErrors) {
  EXPECT_EQ(validation_key("mesh.kind = sphere"), "mesh.kind");
  EXPECT_EQ(validation_key("mesh.n = 1"), "mesh.n");
  EXPECT_EQ(validation_key("time.dt = -1"), "time.dt");
  EXPECT_EQ(validation_key("time.output_every = 0"), "time.output_every");
  EXPECT_EQ(validation_key("init.kind = file"), "init.path");
  EXPECT_EQ(validation_key("init.center = 2"), "init.center");
  EXPECT_EQ(validation_key("solver.tol = 0"), "solver.tol");
  EXPECT_EQ(validation_key("extinction.eps_rel = 1"), "extinction.eps_rel");
  EXPECT_EQ(validation_key("problem.mode = exact"), "problem.mode");
}

TEST(ParseConfig, ParseErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line([] { parse_config("problem.m = 0.5\nproblem.zzz = 1"); }), 2);
  EXPECT_EQ(parse_error_line([] { parse_config("\n\nproblem.m 0.5"); }), 3);
  EXPECT_EQ(parse_error_line([] { parse_config("problem.m = abc"); }), 1);
  EXPECT_EQ(parse_error_line([] { parse_config("problem.m = 0.5x"); }), 1);
  EXPECT_EQ(parse_error_line([] { parse_config("problem.m = nan"); }), 1);
  EXPECT_EQ(parse_error_line([] { parse_config("mesh.n = 2.5"); }), 1);
  EXPECT_EQ(parse_error_line([] { parse_config("solver.clamp_negative = maybe"); }), 1);
  EXPECT_EQ(parse_error_line([] { parse_config("problem.m = 0.5\n# c\nproblem.m = 0.4"); }), 3);
  EXPECT_EQ(parse_error_line([] { parse_config("problem.m ="); }), 1);
}

TEST(Serialize, RoundTripRandomConfigs) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 500; ++i) {
    const RunConfig c = random_config(rng);
    ASSERT_NO_THROW(validate(c)) << serialize(c);
    const std::string text = serialize(c);
    const RunConfig back = parse_config(text);
    EXPECT_EQ(back, c) << text;
    EXPECT_EQ(serialize(back), text);
  }
}

TEST(Serialize, OracleFlagRoundTrips) {
  RunConfig c;
  c.problem.b = 1;
  c.problem.mu = 0;
  c.allow_trivial_ab = true;
  EXPECT_EQ(parse_config(serialize(c)), c);
  EXPECT_TRUE(to_params(c).oracle);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-3), "0.001");
  for (double v : {1.0 / 3.0, 2.0 / 7.0, 1e-300, 6.02e23})
    EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(ToParams, Mapping) {
  RunConfig c;
  c.problem.m = 0.25;
  const ProblemParams p = to_params(c);
  EXPECT_EQ(p.alpha, 4.0);
  EXPECT_EQ(p.p_star, 2.0);
  EXPECT_TRUE(std::holds_alternative<PowerExact>(p.mode));
  c.problem.mode = "cutoff";
  c.problem.cutoff_M = 2.5;
  ASSERT_TRUE(std::holds_alternative<CutoffPower>(to_params(c).mode));
  EXPECT_EQ(std::get<CutoffPower>(to_params(c).mode).M, 2.5);
  c.problem.mode = "lipschitz";
  c.problem.lipschitz_L = 3.0;
  EXPECT_NEAR(*lipschitz_constant(to_params(c)), 3.0, 1e-15);
  EXPECT_FALSE(to_params(c).oracle);
}

TEST(ToMeshSpec, Kinds) {
  RunConfig c;
  EXPECT_EQ(to_mesh_spec(c).kind, MeshKind::Interval1D);
  c.mesh.kind = "rectangle";
  EXPECT_EQ(to_mesh_spec(c).kind, MeshKind::Rectangle2D);
  c.mesh.kind = "radial";
  EXPECT_EQ(to_mesh_spec(c).kind, MeshKind::RadialBall3D);
}

TEST(MakeInitial, Shapes) {
  const Mesh mesh = interval(33);
  InitConfig init;
  init.kind = "constant";
  init.amplitude = 0.3;
  EXPECT_EQ(make_initial(mesh, init).bulk.minCoeff(), 0.3);
  EXPECT_EQ(make_initial(mesh, init).bulk.maxCoeff(), 0.3);

  init.kind = "bump";
  const FieldPair b = make_initial(mesh, init);
  EXPECT_NEAR(b.bulk.maxCoeff(), 0.3, 1e-15);
  EXPECT_GE(b.bulk.minCoeff(), 0.0);
  EXPECT_NEAR(b.bulk(16), 0.3, 1e-15);
  EXPECT_LE(trace_residual(mesh, b), 0.0);

  init.kind = "boundary_zero";
  const FieldPair z = make_initial(mesh, init);
  EXPECT_EQ(z.boundary.cwiseAbs().maxCoeff(), 0.0);
  for (int j : mesh.trace_map) EXPECT_EQ(z.bulk(j), 0.0);
  EXPECT_NEAR(z.bulk.maxCoeff(), 0.3, 1e-15);
  EXPECT_GT(z.bulk(1), 0.0);
}

TEST(MakeInitial, BoundaryZeroOnAllMeshKinds) {
  for (const char* kind : {"interval", "rectangle", "radial"}) {
    RunConfig c;
    c.mesh.kind = kind;
    c.mesh.n = 12;
    c.mesh.nx = c.mesh.ny = 6;
    const Mesh mesh = build_mesh(to_mesh_spec(c));
    c.init.kind = "boundary_zero";
    const FieldPair z = make_initial(mesh, c.init);
    EXPECT_EQ(z.boundary.cwiseAbs().maxCoeff(), 0.0) << kind;
    EXPECT_GT(z.bulk.maxCoeff(), 0.0) << kind;
    EXPECT_GE(z.bulk.minCoeff(), 0.0) << kind;
  }
}

TEST(StateFile, RoundTrip) {
  const fs::path dir = temp_dir("roundtrip");
  const Mesh mesh = interval(17);
  FieldPair z = FieldPair::from_bulk(mesh, random_bump_field(mesh, 1, 2), 0.375);
  z.bulk(3) = 1.0 / 3.0;
  z = FieldPair::from_bulk(mesh, z.bulk, z.time);
  write_state((dir / "s.txt").string(), z);
  const FieldPair back = read_state((dir / "s.txt").string(), mesh);
  EXPECT_EQ(back.time, z.time);
  EXPECT_EQ((back.bulk - z.bulk).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((back.boundary - z.boundary).cwiseAbs().maxCoeff(), 0.0);
}

TEST(StateFile, Errors) {
  const fs::path dir = temp_dir("errors");
  const Mesh mesh = interval(3);
  auto expect_bad = [&](const std::string& text) {
    write_file(dir / "bad.txt", text);
    EXPECT_THROW(read_state((dir / "bad.txt").string(), mesh), ValidationError) << text;
  };
  expect_bad("");
  expect_bad("0\n1\n0\n0\n0\n");
  expect_bad("# fastdiff-state t=0 bulk=4 boundary=2\n0\n0\n0\n0\n0\n0\n");
  expect_bad("# fastdiff-state t=0 bulk=3 boundary=2\n0\n0.5\n");
  expect_bad("# fastdiff-state t=0 bulk=3 boundary=2\n0\nx\n0\n0\n0\n");
  expect_bad("# fastdiff-state t=0 bulk=3 boundary=2\n1\n0\n0\n0\n0\n");
  EXPECT_THROW(read_state((dir / "missing.txt").string(), mesh), ValidationError);
  write_file(dir / "good.txt", "# fastdiff-state t=0 bulk=3 boundary=2\n1\n0.5\n0\n1\n0\n");
  EXPECT_NO_THROW(read_state((dir / "good.txt").string(), mesh));
}

TEST(LoadConfig, MissingFile) {
  EXPECT_ANY_THROW(load_config("/nonexistent/fastdiff.cfg"));
}
