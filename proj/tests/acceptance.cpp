// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "marten/commands.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

using namespace marten;
using namespace marten::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = MARTEN_CONFIG_DIR;
const std::string kCli = MARTEN_CLI;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int id, double seconds, const Outcome& o) {
  std::printf("%s criterion %d (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", id, seconds, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++g_failures;
}

/// Runs `fn` and reports it; `limit` is the runtime budget in seconds.
void run(int id, double limit, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (s >= limit) {
    o.pass = false;
    o.detail += "; over the " + std::to_string(static_cast<int>(limit)) + " s budget";
  }
  report(id, s, o);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

EnergyModel tetragonal_model(double kappa) {
  EnergyModel m;
  m.wells = generate_variants(Vector3(1.15, 0.9, 0.9).asDiagonal(), PointGroup::make(Symmetry::cubic));
  m.wells.includes_austenite = true;
  m.kappa = kappa;
  return m;
}

// ---------------------------------------------------------------------------
// 1. Gradient against central differences
// ---------------------------------------------------------------------------

Outcome gradient_exactness() {
  const Triangulation mesh = structured_mesh(4, 4);
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-0.15, 0.15);
  double worst = 0.0;
  for (double kappa : {0.0, 1e-3}) {
    const EnergyModel m = tetragonal_model(kappa);
    for (double theta : {m.theta_T - 0.5, m.theta_T + 0.5}) {
      FilmState s = homogeneous_state(mesh, m.wells[0]);
      for (Eigen::Index i = 0; i < s.y.values.size(); ++i) s.y.values.data()[i] += u(rng);
      for (Eigen::Index i = 0; i < s.b.values.size(); ++i) s.b.values.data()[i] += u(rng);
      const ScalarP0 th = ScalarP0::constant(mesh.num_elements(), theta);
      const FilmGradient g = film_energy_gradient(s, th, m, mesh);
      const Eigen::VectorXd analytic = pack(FilmState{g.dy, g.db});
      Eigen::VectorXd x = pack(s);
      Eigen::VectorXd fd(x.size());
      const double step = 1e-6;
      FilmState work = s;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double x0 = x(i);
        x(i) = x0 + step;
        unpack(x, work);
        const double ep = film_energy(work, th, m, mesh);
        x(i) = x0 - step;
        unpack(x, work);
        const double em = film_energy(work, th, m, mesh);
        x(i) = x0;
        fd(i) = (ep - em) / (2.0 * step);
      }
      const double rel = (fd - analytic).cwiseAbs().maxCoeff() / analytic.cwiseAbs().maxCoeff();
      worst = std::max(worst, rel);
    }
  }
  return {worst < 1e-6, "max relative error " + fmt(worst) + " over kappa {0, 1e-3} x theta {0.5, 1.5} (< 1e-6)"};
}

// ---------------------------------------------------------------------------
// 2. Twin solver
// ---------------------------------------------------------------------------

Outcome twin_solver() {
  const Matrix3 ui = Vector3(1.15, 0.9, 0.9).asDiagonal();
  const Matrix3 uj = Vector3(0.9, 1.15, 0.9).asDiagonal();
  const auto sols = solve_twin(ui, uj);
  bool ok = sols.size() == 2;
  double resid = 0.0, orth = 0.0, det = 0.0, nn = 0.0;
  for (const TwinSolution& s : sols) {
    resid = std::max(resid, (s.Q * ui - uj - s.a * s.n.transpose()).norm());
    orth = std::max(orth, (s.Q.transpose() * s.Q - Matrix3::Identity()).norm());
    det = std::max(det, std::abs(s.Q.determinant() - 1.0));
    nn = std::max(nn, std::abs(s.n.norm() - 1.0));
  }
  ok = ok && resid < 1e-10 && orth < 1e-12 && det < 1e-12 && nn < 1e-12;

  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> mag(0.05, 0.3);
  int recovered = 0, trials = 0;
  while (trials < 100) {
    const Matrix3 vj = random_spd(rng);
    const Vector3 n = random_unit(rng);
    const Vector3 a = mag(rng) * random_unit(rng);
    const Matrix3 f = vj + a * n.transpose();
    if (f.determinant() <= 0.1) continue;
    ++trials;
    Eigen::SelfAdjointEigenSolver<Matrix3> es(f.transpose() * f);
    const Matrix3 vi = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    bool found = false;
    for (const TwinSolution& s : solve_twin(vi, vj)) found = found || (s.a * s.n.transpose() - a * n.transpose()).norm() < 1e-8;
    recovered += found;
  }
  ok = ok && recovered == 100;
  return {ok, std::to_string(sols.size()) + " solutions, residual " + fmt(resid) + ", |Q^T Q - I| " + fmt(orth) +
                  ", |det Q - 1| " + fmt(det) + ", ||n| - 1| " + fmt(nn) + "; recovered " + std::to_string(recovered) +
                  "/100 planted twins"};
}

// ---------------------------------------------------------------------------
// 3-7. Refinement study
// ---------------------------------------------------------------------------

struct StudyRun {
  StudyResult result;
  std::vector<RatioTrend> trends;
  std::vector<double> constant_gaps;
  double seconds = 0.0;
  double floor = 0.0;
};

StudyRun run_study() {
  const io::RunConfig c = io::load_config(kConfigs / "study.ini");
  const EnergyModel model = io::build_model(c);
  const LaminateSpec lam = io::build_laminate(c, model.wells);
  StudyOptions o;
  o.levels = c.study.levels;
  o.theta = c.theta;
  o.band_scale = c.study.band_scale;
  o.minimize = c.minimizer;
  o.diagnostics = diagnostics_options(c);
  StudyRun out;
  out.floor = 100.0 * c.minimizer.grad_tol;
  const auto t0 = std::chrono::steady_clock::now();
  out.result = convergence_study(lam, model, o, [&](const StudyLevel& l, const Triangulation& mesh, const FilmState& st) {
    out.constant_gaps.push_back(functional_gap(st, lam, TestFunctional::constant(1.0), mesh).gap);
    std::printf("  study level %d: E = %.6g, %d iterations%s\n", l.cells, l.report.energy, l.report.iterations,
                l.report.converged ? "" : " (not converged)");
    std::fflush(stdout);
  });
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.trends = study_trends(out.result, c.study.functionals, out.floor);
  return out;
}

const RatioTrend& trend(const StudyRun& s, const std::string& name) {
  for (const RatioTrend& t : s.trends) {
    if (t.name == name) return t;
  }
  throw std::runtime_error("no trend " + name);
}

template <class Get>
std::string series(const StudyRun& s, Get get) {
  std::string out;
  for (const StudyLevel& l : s.result.levels) out += (out.empty() ? "" : " ") + fmt(get(l));
  return out;
}

Outcome energy_scaling(const StudyRun& s) {
  bool monotone = true;
  const auto& lv = s.result.levels;
  for (std::size_t l = 1; l < lv.size(); ++l) monotone = monotone && lv[l].report.energy < lv[l - 1].report.energy;
  const double k = s.result.energy_slope;
  const bool ok = s.result.excluded.empty() && monotone && k >= 0.3 && k <= 0.8;
  return {ok, "slope " + fmt(k) + " (in [0.3, 0.8]), E = " + series(s, [](const StudyLevel& l) { return l.report.energy; }) +
                  (monotone ? ", decreasing" : ", NOT decreasing") + ", " +
                  std::to_string(s.result.excluded.size()) + " unconverged levels"};
}

Outcome growth_check(const StudyRun& s, const std::string& name) {
  const RatioTrend& t = trend(s, name);
  const double g = t.growth();
  return {g < 10.0, name + " ratio growth " + fmt(g)};
}

/// Finest below coarsest and ratio growth below 10.
Outcome decay_check(const StudyRun& s, const std::string& name, double (*get)(const StudyLevel&)) {
  const auto& lv = s.result.levels;
  const double first = get(lv.front()), last = get(lv.back());
  const double g = trend(s, name).growth();
  const bool ok = last < first && g < 10.0;
  return {ok, name + " " + fmt(first) + " -> " + fmt(last) + ", ratio growth " + fmt(g)};
}

Outcome combine(const std::vector<Outcome>& parts) {
  Outcome o{true, ""};
  for (const Outcome& p : parts) {
    o.pass = o.pass && p.pass;
    o.detail += (o.detail.empty() ? "" : "; ") + p.detail;
  }
  return o;
}

// ---------------------------------------------------------------------------
// 8-10. Evolution
// ---------------------------------------------------------------------------

std::vector<StepRecord> run_evolution(const io::RunConfig& c) {
  const RunSetup s = build_setup(c);
  const Schedule schedule = build_schedule(c, s.mesh.num_elements());
  FilmState start = s.initial;
  if (c.initial.relax) start = minimize(s.initial, schedule.theta[0], s.model, s.mesh, s.node_mask, c.minimizer).state;
  return evolve(start, schedule, build_policy(c), s.model, s.mesh, s.node_mask, c.minimizer, {}, false);
}

Outcome nucleation_necessity() {
  io::RunConfig c = io::load_config(kConfigs / "evolve_heating.ini");
  const bool shape = c.mesh.nx == 32 && c.mesh.ny == 32 && c.schedule.steps == 20 &&
                     c.schedule.temperatures == std::vector<double>{c.material.theta_T - 0.5, c.material.theta_T + 0.5} &&
                     c.nucleation.width == 0.05 && c.nucleation.seed == 20020820;
  c.nucleation.enabled = true;
  const double on = run_evolution(c).back().fractions.austenite;
  c.nucleation.enabled = false;
  const double off = run_evolution(c).back().fractions.austenite;
  return {shape && off < 0.1 && on > 0.9,
          "final austenite fraction " + fmt(off) + " without nucleation (< 0.1), " + fmt(on) + " with (> 0.9)"};
}

Outcome hysteresis() {
  const io::RunConfig c = io::load_config(kConfigs / "evolve_cycle.ini");
  const auto steps = run_evolution(c);
  const double theta_t = c.material.theta_T;
  // first and last records at theta_T: the up-sweep and the down-sweep
  const StepRecord* up = nullptr;
  const StepRecord* down = nullptr;
  for (const StepRecord& r : steps) {
    if (std::abs(r.theta_mean - theta_t) < 1e-12) {
      if (!up) up = &r;
      down = &r;
    }
  }
  if (!up || up == down) return {false, "schedule does not pass theta_T twice"};
  const double diff = std::abs(up->fractions.austenite - down->fractions.austenite);
  return {diff > 0.2, "austenite fraction at theta_T: " + fmt(up->fractions.austenite) + " heating, " +
                          fmt(down->fractions.austenite) + " cooling, difference " + fmt(diff) + " (> 0.2)"};
}

int run_cli(const std::string& args) {
  const std::string cmd = "\"" + kCli + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "marten_acceptance_determinism";
  fs::remove_all(dir);
  const std::string cfg = "\"" + (kConfigs / "evolve_heating.ini").string() + "\"";
  const int a = run_cli("evolve --quiet --seed 20020820 --config " + cfg + " --out \"" + (dir / "a").string() + "\"");
  const int b = run_cli("evolve --quiet --seed 20020820 --config " + cfg + " --out \"" + (dir / "b").string() + "\"");
  if (a != 0 || b != 0) return {false, "evolve exited with " + std::to_string(a) + " and " + std::to_string(b)};
  const std::string ta = io::read_file(dir / "a" / "trajectory.csv");
  const std::string tb = io::read_file(dir / "b" / "trajectory.csv");
  return {ta == tb && !ta.empty(), std::string(ta == tb ? "identical" : "DIFFERENT") + " trajectory.csv (" +
                                       std::to_string(ta.size()) + " bytes)"};
}

// ---------------------------------------------------------------------------
// 11. Oracles
// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  std::mt19937_64 rng(1111);
  std::uniform_int_distribution<int> cells(1, 4);
  std::uniform_real_distribution<double> u(-0.2, 0.2), unit(0.0, 1.0);
  double worst_energy = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Triangulation mesh = structured_mesh(cells(rng), cells(rng), Rectangle{0.0, 0.0, 0.5 + unit(rng), 0.5 + unit(rng)});
    EnergyModel m = tetragonal_model(t % 3 == 0 ? 0.0 : 0.05 * unit(rng));
    m.mu_a = 0.5 + unit(rng);
    m.mu_m = 0.5 + unit(rng);
    m.c_L = unit(rng);
    m.eps_reg = 1e-4 + 1e-2 * unit(rng);
    m.b0 = Vector3(u(rng), u(rng), 1.0 + u(rng));
    FilmState s = homogeneous_state(mesh, m.wells[static_cast<std::size_t>(t % 3)]);
    for (Eigen::Index i = 0; i < s.y.values.size(); ++i) s.y.values.data()[i] += u(rng);
    for (Eigen::Index i = 0; i < s.b.values.size(); ++i) s.b.values.data()[i] += u(rng);
    ScalarP0 theta = ScalarP0::constant(mesh.num_elements(), 0.0);
    for (Eigen::Index k = 0; k < theta.values.size(); ++k) theta.values(k) = 2.0 * unit(rng);

    NaiveFilm p;
    p.nodes = mesh.nodes();
    p.tris = mesh.triangles();
    for (Eigen::Index i = 0; i < s.y.values.cols(); ++i) p.y.push_back(s.y.values.col(i));
    for (Eigen::Index k = 0; k < s.b.values.cols(); ++k) p.b.push_back(s.b.values.col(k));
    p.theta.assign(theta.values.data(), theta.values.data() + theta.values.size());
    p.variants = m.wells.variants;
    p.austenite = true;
    p.mu_a = m.mu_a;
    p.mu_m = m.mu_m;
    p.theta_T = m.theta_T;
    p.c_L = m.c_L;
    p.kappa = m.kappa;
    p.eps = m.eps_reg;
    p.b0 = m.b0;
    const double ref = naive_film_energy(p);
    const double got = film_energy(s, theta, m, mesh);
    worst_energy = std::max(worst_energy, std::abs(got - ref) / std::abs(ref));
  }

  // project_pi against a quasi-uniform rotation grid. On the grid the squared
  // distance can only be larger; the excess is at most
  // 2 (1 - cos delta) |F| |U| for a grid of covering angle delta.
  const std::vector<Matrix3> grid = rotation_grid(200000);
  std::vector<Matrix3> probes;
  for (int i = 0; i < 500; ++i) probes.push_back(random_rotation(rng));
  const double delta = 1.5 * grid_covering_angle(grid, probes);
  const EnergyModel m = tetragonal_model(0.0);
  std::vector<Matrix3> wells = m.wells.variants;
  wells.push_back(Matrix3::Identity());
  int bad = 0;
  double worst_excess = 0.0;
  for (int t = 0; t < 1000; ++t) {
    Matrix3 f = random_rotation(rng) * wells[static_cast<std::size_t>(t % 4)] + random_matrix(rng, 0.25);
    if (t % 10 == 0) f = random_matrix(rng, 1.5);
    const Projection pr = project_pi(f, m.wells);
    const double lib2 = pr.distance * pr.distance;
    double best2 = 1e300, tol = 0.0;
    for (const Matrix3& w : wells) {
      const double d = grid_well_distance(f, w, grid);
      if (d * d < best2) {
        best2 = d * d;
        tol = 2.0 * (1.0 - std::cos(delta)) * f.norm() * w.norm();
      }
    }
    const bool consistent = std::abs((f - pr.projected).squaredNorm() - lib2) < 1e-10 * (1.0 + lib2);
    const bool within = lib2 <= best2 + 1e-12 && lib2 >= best2 - tol - 1e-12;
    worst_excess = std::max(worst_excess, best2 - lib2);
    bad += !(consistent && within);
  }
  const bool ok = worst_energy < 1e-12 && bad == 0;
  return {ok, "film energy max relative difference " + fmt(worst_energy) + " on 100 states (< 1e-12); project_pi " +
                  std::to_string(1000 - bad) + "/1000 within grid resolution (covering angle " + fmt(delta) +
                  ", largest grid excess " + fmt(worst_excess) + ")"};
}

}  // namespace

int main() {
  run(1, 10.0, gradient_exactness);
  run(2, 5.0, twin_solver);

  StudyRun study;
  bool study_ok = true;
  std::string study_error;
  try {
    study = run_study();
  } catch (const std::exception& e) {
    study_ok = false;
    study_error = e.what();
  }
  auto study_criterion = [&](int id, const std::function<Outcome()>& fn) {
    if (!study_ok) {
      report(id, 0.0, {false, "study failed: " + study_error});
      return;
    }
    report(id, study.seconds, fn());
  };
  study_criterion(3, [&] {
    Outcome o = energy_scaling(study);
    if (study.seconds >= 600.0) {
      o.pass = false;
      o.detail += "; over the 600 s budget";
    }
    return o;
  });
  study_criterion(4, [&] {
    Outcome o = growth_check(study, "tau_other");
    o.detail += ", tau_other = " + series(study, [](const StudyLevel& l) { return l.diagnostics.tau_other; });
    return o;
  });
  study_criterion(5, [&] {
    return decay_check(study, "local_error", [](const StudyLevel& l) { return l.diagnostics.local_error; });
  });
  study_criterion(6, [&] {
    return combine({decay_check(study, "directional_error", [](const StudyLevel& l) { return l.diagnostics.directional_error; }),
                    decay_check(study, "l2_error", [](const StudyLevel& l) { return l.diagnostics.l2_error; }),
                    decay_check(study, "weak_deviation", [](const StudyLevel& l) { return l.diagnostics.weak_deviation; }),
                    decay_check(study, "pi_residual", [](const StudyLevel& l) { return l.diagnostics.pi_residual; })});
  });
  study_criterion(7, [&] {
    std::vector<Outcome> parts;
    for (std::size_t q = 0; q < study.result.levels.front().diagnostics.gaps.size(); ++q) {
      const RatioTrend& t = study.trends[study.trends.size() - study.result.levels.front().diagnostics.gaps.size() + q];
      Outcome part = growth_check(study, t.name);
      part.detail += " (gap " + series(study, [q](const StudyLevel& l) { return l.diagnostics.gaps[q].gap; }) + ")";
      parts.push_back(part);
    }
    bool zero = !study.constant_gaps.empty();
    for (double g : study.constant_gaps) zero = zero && g == 0.0;
    parts.push_back({zero, std::string("constant functional gap ") + (zero ? "exactly 0" : "NONZERO") + " at every level"});
    Outcome o = combine(parts);
    o.detail += " (diagnostics at or below " + fmt(study.floor) + " count as 0)";
    return o;
  });

  run(8, 300.0, nucleation_necessity);
  run(9, 300.0, hysteresis);
  run(10, 300.0, determinism);
  run(11, 120.0, oracle_equivalence);

  std::printf("%s: %d criteria failed\n", g_failures ? "FAIL" : "PASS", g_failures);
  return g_failures ? 1 : 0;
}
