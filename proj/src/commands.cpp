#include "fastdiff/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "fastdiff/diagnostics.hpp"
#include "fastdiff/energy.hpp"
#include "fastdiff/oracle.hpp"
#include "fastdiff/stepper.hpp"

namespace fastdiff {

namespace {

namespace fs = std::filesystem;

struct Problem {
  ProblemParams params;
  Mesh mesh;
  FieldPair init;
  SolverOptions solver;
};

// Everything that can fail because of the configuration itself.
Problem setup(const RunConfig& config) {
  validate(config);
  Problem p{to_params(config), build_mesh(to_mesh_spec(config)), {}, to_solver_options(config)};
  p.solver.validate();
  p.init = config.init.kind == "file" ? read_state(config.init.path, p.mesh)
                                      : make_initial(p.mesh, config.init);
  p.init.time = 0.0;  // a snapshot restarts the clock
  return p;
}

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double min_entry(const FieldPair& z) {
  return std::min(z.bulk.size() ? z.bulk.minCoeff() : 0.0,
                  z.boundary.size() ? z.boundary.minCoeff() : 0.0);
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : "none"; }

double energy_threshold(const Trajectory& traj) {
  return 1e-8 * (1.0 + std::abs(traj.reports.front().J));
}

std::optional<WellReport> maybe_well(const Problem& p, int n_samples, std::uint64_t seed) {
  if (!p.params.has_perturbation() || !(p.params.alpha_pstar() > 1.0)) return std::nullopt;
  return estimate_best_constant(p.mesh, p.params, n_samples, seed);
}

void write_series(const fs::path& path, const Trajectory& traj, const std::vector<double>& mass,
                  const std::vector<double>& viol, int every) {
  std::ofstream f(path);
  f << kSeriesHeader << '\n';
  const std::size_t n = traj.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (k % static_cast<std::size_t>(every) != 0 && k + 1 != n) continue;
    const auto& e = traj.reports[k];
    const auto& z = traj.states[k];
    const bool stepped = k > 0;
    f << format_double(traj.times[k]) << ',' << format_double(e.Y) << ','
      << format_double(e.phi1) << ',' << format_double(e.phi2) << ',' << format_double(e.J)
      << ',' << format_double(max_abs(z.bulk)) << ',' << format_double(max_abs(z.boundary))
      << ',' << format_double(stepped ? mass[k - 1] : 0.0) << ','
      << format_double(stepped ? viol[k - 1] : 0.0) << ','
      << (stepped ? traj.step_stats[k - 1].newton_iters : 0) << ','
      << format_double(stepped ? traj.step_stats[k - 1].residual : 0.0) << '\n';
  }
}

void write_well(std::ostream& o, const WellReport& w) {
  o << "well.C_est = " << format_double(w.C_est) << '\n'
    << "well.d_est = " << format_double(w.d_est) << '\n'
    << "well.samples = " << w.samples << '\n'
    << "well.seed = " << w.seed << '\n'
    << "well.min_nehari_energy = " << format_double(w.min_nehari_energy) << '\n';
}

}  // namespace

std::string format_check(const CheckLine& c) {
  return "CHECK " + c.name + (c.pass ? " PASS " : " FAIL ") + c.measured;
}

int cmd_run(const RunConfig& config, int n_samples, std::uint64_t seed, std::ostream& log) {
  Problem p;
  try {
    p = setup(config);
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  Trajectory traj;
  std::optional<WellReport> well;
  try {
    well = maybe_well(p, n_samples, seed);
    traj = run(p.init, config.time.dt, config.time.t_end, p.mesh, p.params, p.solver, {},
               RunOptions{config.eps_rel});
  } catch (const RunError& e) {
    log << "solver failure at t=" << format_double(e.time) << ": " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    log << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }

  const auto viol = energy_violations(traj, p.mesh, p.params);
  const auto mass = mass_identity_residual(traj, p.params);
  const ExtinctionReport ext = detect_extinction(traj, config.eps_rel);

  std::vector<CheckLine> checks;
  {
    const double worst = viol.empty() ? 0.0 : *std::max_element(viol.begin(), viol.end());
    checks.push_back({"energy_inequality", worst <= energy_threshold(traj), format_double(worst)});
  }
  {
    double lo = std::numeric_limits<double>::infinity();
    double tr = 0.0;
    for (const auto& z : traj.states) {
      lo = std::min(lo, min_entry(z));
      tr = std::max(tr, trace_residual(p.mesh, z));
    }
    checks.push_back({"nonnegativity", lo >= -kTolPos, format_double(lo)});
    checks.push_back({"trace_consistency", tr == 0.0, format_double(tr)});
  }
  if (const auto L = lipschitz_constant(p.params)) {
    const LinfReport r = check_linf_bound(traj, p.params, *L);
    checks.push_back({"linf_bound", r.ok(), format_double(r.margin)});
  }
  if (std::holds_alternative<CutoffPower>(p.params.mode))
    checks.push_back({"cutoff_window", !traj.cutoff_exit_time, opt(traj.cutoff_exit_time)});
  std::optional<InvarianceReport> inv;
  if (well) {
    inv = check_invariance(traj, *well, p.mesh, p.params, ext.t_ext_num);
    if (inv->status != InvarianceStatus::NotInitiallyMember)
      checks.push_back({"invariance", inv->status == InvarianceStatus::Invariant,
                        opt(inv->first_violation)});
  }

  std::error_code ec;
  const fs::path dir(config.output_dir);
  fs::create_directories(dir, ec);
  if (ec) {
    log << "cannot create output directory '" << dir.string() << "': " << ec.message() << '\n';
    return kExitConfig;
  }
  write_series(dir / "series.csv", traj, mass, viol, config.time.output_every);
  write_state((dir / "state_final.txt").string(), traj.states.back());

  std::ofstream meta(dir / "meta.txt");
  meta << "# config\n" << serialize(config) << "# well\n";
  if (well) write_well(meta, *well);
  else meta << "well = none\n";
  meta << "# extinction\n"
       << "extinction.t_ext_num = " << opt(ext.t_ext_num) << '\n'
       << "extinction.fitted_exponent = " << opt(ext.fitted_exponent) << '\n'
       << "extinction.predicted_exponent = " << opt(predicted_decay_exponent(p.params)) << '\n'
       << "extinction.fitted_prefactor = " << opt(ext.fitted_prefactor) << '\n'
       << "extinction.fit_window = " << format_double(ext.fit_window.first) << ' '
       << format_double(ext.fit_window.second) << '\n'
       << "extinction.fit_r2 = " << format_double(ext.fit_r2) << '\n'
       << "extinction.fit_samples = " << ext.fit_samples << '\n'
       << "# membership\n";
  if (well) {
    const std::size_t n = traj.size();
    const auto every = static_cast<std::size_t>(config.time.output_every);
    for (std::size_t k = 0; k < n; ++k) {
      if (k % every != 0 && k + 1 != n) continue;
      const Membership m = stable_set_check(traj.states[k], *well, p.mesh, p.params);
      meta << "membership t=" << format_double(traj.times[k]) << " member=" << m.member()
           << " nonneg=" << m.nonneg << " below_depth=" << m.below_depth
           << " nehari_strict=" << m.nehari_strict << " is_zero=" << m.is_zero
           << " margin=" << opt(nehari_margin(traj.reports[k], p.params)) << '\n';
    }
  } else {
    meta << "membership = none\n";
  }
  meta << "# checks\n";
  for (const auto& c : checks) meta << format_check(c) << '\n';

  log << "wrote " << traj.size() << " states to " << dir.string() << "; t_ext_num = "
      << opt(ext.t_ext_num) << '\n';
  return kExitOk;
}

int cmd_verify(const RunConfig& config, std::ostream& out) {
  Problem p;
  try {
    p = setup(config);
  } catch (const std::exception& e) {
    out << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::vector<CheckLine> checks;
  std::vector<std::string> skipped;

  {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> rs(0.0, 10.0), as(1.0, 10.0);
    long bad = 0;
    for (int i = 0; i < 100000; ++i) {
      const double r = rs(gen), s = rs(gen), a = as(gen);
      for (bool ok : check_fundamental_inequalities(r, s, a)) bad += !ok;
    }
    checks.push_back({"appendix_inequalities", bad == 0, std::to_string(bad)});
  }

  if (p.params.has_perturbation() && p.params.alpha_pstar() > 1.0) {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      const FieldPair z = FieldPair::from_bulk(p.mesh, random_bump_field(p.mesh, 7, i));
      const double t = nehari_scale(z, p.mesh, p.params);
      const FieldPair tz = FieldPair::from_bulk(p.mesh, t * z.bulk);
      const double J = evaluate(tz, p.mesh, p.params).J;
      const double d = depth_from_constant(sobolev_quotient(z, p.mesh, p.params),
                                           p.params.alpha_pstar());
      worst = std::max(worst, std::abs(J - d) / std::abs(d));
    }
    checks.push_back({"nehari_depth_identity", worst <= 1e-10, format_double(worst)});
  } else {
    skipped.push_back("nehari_depth_identity");
  }

  try {
    const Stepper stepper(p.mesh, p.params, p.solver);
    const double amp = max_abs(p.init.bulk) > 0.0 ? max_abs(p.init.bulk) : 1.0;
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 20; ++i) {
      Vector v = random_bump_field(p.mesh, 11, i);
      v *= amp / v.maxCoeff();
      const FieldPair prev = FieldPair::from_bulk(p.mesh, v);
      const Vector g2 = 2.0 * v;
      const Vector g3 = Vector::Zero(v.size());
      const Vector z1 = stepper.step(prev, config.time.dt).state.bulk;
      const Vector z2 = stepper.step(prev, config.time.dt, g2).state.bulk;
      const Vector z3 = stepper.step(prev, config.time.dt, g3).state.bulk;
      worst = std::max({worst, max_abs(z1 - z2) / amp, max_abs(z1 - z3) / amp});
    }
    checks.push_back({"step_uniqueness", worst <= 10.0 * p.solver.tol, format_double(worst)});
  } catch (const std::exception& e) {
    checks.push_back({"step_uniqueness", false, std::string("error: ") + e.what()});
  }

  try {
    const Trajectory traj = run(p.init, config.time.dt, config.time.t_end, p.mesh, p.params,
                                p.solver, {}, RunOptions{config.eps_rel});
    const double worst = check_energy_monotonicity(traj, p.mesh, p.params);
    checks.push_back({"energy_inequality", worst <= energy_threshold(traj), format_double(worst)});
    if (const auto L = lipschitz_constant(p.params)) {
      const LinfReport r = check_linf_bound(traj, p.params, *L);
      checks.push_back({"linf_recursion", r.discrete_ok, format_double(r.margin)});
    } else {
      skipped.push_back("linf_recursion");
    }
  } catch (const std::exception& e) {
    checks.push_back({"energy_inequality", false, std::string("error: ") + e.what()});
  }

  if (p.params.oracle) {
    try {
      const double c = config.init.kind == "constant" && config.init.amplitude > 0.0
                           ? config.init.amplitude
                           : 1.0;
      const FieldPair init = FieldPair::from_bulk(p.mesh, Vector::Constant(p.mesh.bulk_size(), c));
      const Trajectory traj = run(init, config.time.dt, config.time.t_end, p.mesh, p.params,
                                  p.solver, {}, RunOptions{config.eps_rel});
      const double u0 = gamma(c, p.params.alpha);
      double ode_err = 0.0, scalar_err = 0.0;
      double v_scalar = c;
      for (std::size_t k = 0; k < traj.size(); ++k) {
        const double exact = oracle::ode_extinction(u0, p.params.m, traj.times[k]);
        if (k > 0)
          v_scalar = oracle::scalar_step_oracle(gamma(v_scalar, p.params.alpha),
                                                traj.times[k] - traj.times[k - 1], 1.0,
                                                p.params.alpha);
        for (Eigen::Index i = 0; i < traj.states[k].bulk.size(); ++i) {
          const double v = traj.states[k].bulk(i);
          ode_err = std::max(ode_err, std::abs(gamma(v, p.params.alpha) - exact));
          scalar_err = std::max(scalar_err, std::abs(v - v_scalar) / c);
        }
      }
      checks.push_back({"oracle_ode", ode_err <= 2.0 * config.time.dt * std::max(1.0, u0),
                        format_double(ode_err)});
      checks.push_back({"oracle_scalar_step", scalar_err <= 1e-8, format_double(scalar_err)});
    } catch (const std::exception& e) {
      checks.push_back({"oracle_ode", false, std::string("error: ") + e.what()});
    }
  }
  if (p.params.m == 1.0 && !p.params.has_perturbation() && p.mesh.bulk_size() <= 200) {
    try {
      const double t = std::min(config.time.t_end, 0.1);
      const Trajectory traj = run(p.init, config.time.dt, t, p.mesh, p.params, p.solver, {},
                                  RunOptions{0.0});
      const FieldPair ref = oracle::linear_reference(p.mesh, p.params, p.init, traj.times.back());
      const FieldPair& num = traj.states.back();
      auto wnorm = [&](const FieldPair& z) {
        return std::sqrt(p.mesh.bulk_weights.dot(z.bulk.cwiseAbs2()) +
                         p.mesh.boundary_weights.dot(z.boundary.cwiseAbs2()));
      };
      FieldPair diff = num;
      diff.bulk -= ref.bulk;
      diff.boundary -= ref.boundary;
      const double nr = wnorm(ref);
      const double rel = nr > 0.0 ? wnorm(diff) / nr : wnorm(diff);
      checks.push_back({"linear_reference", rel <= 10.0 * config.time.dt, format_double(rel)});
    } catch (const std::exception& e) {
      checks.push_back({"linear_reference", false, std::string("error: ") + e.what()});
    }
  }

  bool all = true;
  for (const auto& c : checks) {
    out << format_check(c) << '\n';
    all = all && c.pass;
  }
  for (const auto& s : skipped) out << "CHECK " << s << " SKIP not applicable\n";
  return all ? kExitOk : kExitVerify;
}

int cmd_depth(const RunConfig& config, int n_samples, std::uint64_t seed, std::ostream& out) {
  Problem p;
  WellReport well;
  try {
    p = setup(config);
    if (n_samples < 1) throw ValidationError("--samples", "must be >= 1");
    well = estimate_best_constant(p.mesh, p.params, n_samples, seed);
  } catch (const std::exception& e) {
    out << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::ostringstream text;
  write_well(text, well);
  out << text.str();
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  std::ofstream f(fs::path(config.output_dir) / "well.txt");
  if (ec || !f) {
    out << "cannot write well.txt under '" << config.output_dir << "'\n";
    return kExitConfig;
  }
  f << text.str();
  return kExitOk;
}

}  // namespace fastdiff
