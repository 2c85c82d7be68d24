#pragma once

// Config-driven runs behind the command-line subcommands. Each run returns
// an exit status: 0 success, 1 usage or config error, 2 non-convergence.

#include "marten/analysis.hpp"
#include "marten/evolution.hpp"
#include "marten/io/config.hpp"
#include "marten/io/csv.hpp"
#include "marten/io/files.hpp"
#include "marten/io/mesh_io.hpp"
#include "marten/io/schedule_io.hpp"
#include "marten/io/vtk.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace marten {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNotConverged = 2 };

struct CommandOverrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

/// Everything a run needs, built from a validated config.
struct RunSetup {
  Triangulation mesh;
  EnergyModel model;
  std::optional<LaminateSpec> laminate;
  Matrix3 boundary_gradient = Matrix3::Identity();
  FilmState initial;
  std::vector<char> node_mask;
};

inline RunSetup build_setup(const io::RunConfig& c) {
  RunSetup s;
  if (!c.mesh.file.empty()) {
    std::ifstream in(c.resolve(c.mesh.file));
    if (!in) throw io::ConfigError("mesh.file: cannot open " + c.resolve(c.mesh.file).string());
    s.mesh = io::read_mesh(in);
  } else {
    s.mesh = structured_mesh(c.mesh.nx, c.mesh.ny, c.mesh.domain);
  }
  s.model = io::build_model(c);
  if (c.boundary.kind == io::BoundaryKind::laminate) {
    s.laminate = io::build_laminate(c, s.model.wells);
    s.boundary_gradient = s.laminate->mean_gradient();
  } else {
    s.boundary_gradient = c.boundary.affine;
  }
  switch (c.initial.kind) {
    case io::InitialKind::bands: {
      const double period = c.initial.band_scale * std::sqrt(s.mesh.h());
      s.initial = laminate_state(s.mesh, *s.laminate, period, period, c.initial.offset);
      break;
    }
    case io::InitialKind::boundary:
      s.initial = homogeneous_state(s.mesh, s.boundary_gradient);
      break;
    case io::InitialKind::variant:
      s.initial = homogeneous_state(s.mesh, s.model.wells.variants[static_cast<std::size_t>(c.initial.variant - 1)]);
      break;
  }
  s.node_mask = apply_dirichlet(s.mesh, s.initial.y, s.boundary_gradient);
  return s;
}

/// Phase index per element: 0 austenite, k + 1 for variant k.
inline std::vector<int> phase_indices(const FilmState& st, const ScalarP0& theta, const EnergyModel& m,
                                      const Triangulation& mesh) {
  std::vector<int> out(mesh.num_elements());
  for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
    const PhaseLabel p = classify_phase(assemble_F(mesh, st.y, st.b, k), theta.values(static_cast<Eigen::Index>(k)), m);
    out[k] = p.austenite() ? 0 : p.well + 1;
  }
  return out;
}

inline DiagnosticsOptions diagnostics_options(const io::RunConfig& c) {
  DiagnosticsOptions d;
  d.omega = Subdomain{c.study.subdomain};
  d.rho = c.study.rho;
  d.w = c.study.w;
  d.functionals.clear();
  for (const std::string& f : c.study.functionals) d.functionals.push_back(TestFunctional::from_name(f));
  return d;
}

namespace detail {

inline std::filesystem::path output_dir(const io::RunConfig& c, const CommandOverrides& o) {
  return o.out ? std::filesystem::path(*o.out) : std::filesystem::path(c.output.dir);
}

inline std::string step_name(const char* stem, int n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d.vtk", stem, n);
  return buf;
}

/// Maps exceptions to exit codes and prints one error line.
template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const NumericalFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

inline std::string itos(long long v) { return std::to_string(v); }
inline std::string dtos(double v) { return io::format_double(v); }

}  // namespace detail

// ---------------------------------------------------------------------------
// minimize
// ---------------------------------------------------------------------------

inline int run_minimize(const io::RunConfig& c, const CommandOverrides& o = {}) {
  RunSetup s = build_setup(c);
  const std::filesystem::path dir = detail::output_dir(c, o);
  const ScalarP0 theta = ScalarP0::constant(s.mesh.num_elements(), c.theta);

  io::CsvTable log({"iteration", "energy", "grad_norm", "step"});
  IterationLog logger;
  if (c.output.log) {
    logger = [&](const IterationRecord& r) {
      log.add_row({detail::itos(r.iter), detail::dtos(r.energy), detail::dtos(r.grad_norm), detail::dtos(r.step)});
    };
  }
  MinimizeResult res = minimize(s.initial, theta, s.model, s.mesh, s.node_mask, c.minimizer, logger);
  const FilmEvaluation ev = evaluate_film(res.state, theta, s.model, s.mesh, false);
  const VolumeFractions tau = volume_fractions(res.state, s.model, s.mesh);

  std::vector<std::string> head{"energy",     "jump_energy", "boundary_energy", "bulk_energy",
                                "iterations", "grad_norm",   "converged",       "tau_austenite"};
  // surface terms include the kappa factor so the three parts sum to the energy
  std::vector<std::string> row{detail::dtos(ev.terms.total),
                               detail::dtos(s.model.kappa * ev.terms.jumps),
                               detail::dtos(s.model.kappa * ev.terms.boundary),
                               detail::dtos(ev.terms.bulk),
                               detail::itos(res.report.iterations), detail::dtos(res.report.grad_norm),
                               res.report.converged ? "1" : "0",   detail::dtos(tau.austenite)};
  for (std::size_t k = 0; k < tau.variant.size(); ++k) {
    head.push_back("tau_" + std::to_string(k + 1));
    row.push_back(detail::dtos(tau.variant[k]));
  }
  if (s.laminate) {
    const DiagnosticsReport d = diagnose(res.state, *s.laminate, s.model, s.mesh, theta, diagnostics_options(c));
    const std::vector<std::pair<std::string, double>> cols{
        {"local_fraction_i", d.local.fraction_i}, {"local_fraction_j", d.local.fraction_j},
        {"local_error", d.local_error},           {"directional_error", d.directional_error},
        {"l2_error", d.l2_error},                 {"weak_deviation", d.weak_deviation},
        {"pi_residual", d.pi_residual}};
    for (const auto& [name, v] : cols) {
      head.push_back(name);
      row.push_back(detail::dtos(v));
    }
    for (std::size_t q = 0; q < d.gaps.size(); ++q) {
      head.push_back("gap_" + c.study.functionals[q]);
      row.push_back(detail::dtos(d.gaps[q].gap));
      head.push_back("fnorm_" + c.study.functionals[q]);
      row.push_back(detail::dtos(d.gaps[q].f_norm));
    }
  }
  io::CsvTable diag(head);
  diag.add_row(row);

  if (c.output.vtk) {
    const std::vector<int> phase = phase_indices(res.state, theta, s.model, s.mesh);
    io::write_atomic(dir / "state.vtk", io::format_vtk(s.mesh, res.state, &theta, &phase));
  }
  io::write_atomic(dir / "diagnostics.csv", diag.str());
  if (c.output.log) io::write_atomic(dir / "iterations.csv", log.str());

  if (!o.quiet) {
    std::cerr << "minimize: E = " << res.report.energy << " after " << res.report.iterations << " iterations, "
              << res.report.message << "\n";
  }
  return res.report.converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------------------
// study
// ---------------------------------------------------------------------------

/// Diagnostic over its estimate scale at every level. Diagnostics at or below
/// `floor` are below solver resolution and count as zero.
struct RatioTrend {
  std::string name;
  std::vector<double> ratio;

  /// Finest over coarsest ratio; 0 when the finest is zero, inf when only
  /// the coarsest is.
  double growth() const {
    if (ratio.empty() || ratio.back() == 0.0) return 0.0;
    return ratio.front() == 0.0 ? std::numeric_limits<double>::infinity() : ratio.back() / ratio.front();
  }
};

/// Ratios of every diagnostic to the right-hand side of its estimate.
inline std::vector<RatioTrend> study_trends(const StudyResult& r, const std::vector<std::string>& functional_names,
                                            double floor = 0.0) {
  std::vector<RatioTrend> out;
  auto add = [&](const std::string& name, auto value, auto scale) {
    RatioTrend t{name, {}};
    for (const StudyLevel& l : r.levels) {
      const double v = value(l);
      const double den = scale(l);
      t.ratio.push_back(std::abs(v) <= floor || !(den > 0.0) ? 0.0 : std::abs(v) / den);
    }
    out.push_back(std::move(t));
  };
  auto strong = [](const StudyLevel& l) { return EstimateScales::strong(l.report.energy); };
  auto weak = [](const StudyLevel& l) { return EstimateScales::weak(l.report.energy); };
  add("tau_other", [](const StudyLevel& l) { return l.diagnostics.tau_other; }, strong);
  add("local_error", [](const StudyLevel& l) { return l.diagnostics.local_error; }, weak);
  add("directional_error", [](const StudyLevel& l) { return l.diagnostics.directional_error; }, strong);
  add("l2_error", [](const StudyLevel& l) { return l.diagnostics.l2_error; }, strong);
  add("weak_deviation", [](const StudyLevel& l) { return l.diagnostics.weak_deviation; }, weak);
  add("pi_residual", [](const StudyLevel& l) { return l.diagnostics.pi_residual; }, strong);
  for (std::size_t q = 0; q < functional_names.size(); ++q) {
    add("gap_" + functional_names[q], [q](const StudyLevel& l) { return l.diagnostics.gaps[q].gap; },
        [q](const StudyLevel& l) {
          return l.diagnostics.gaps[q].f_norm * EstimateScales::functional(l.report.energy);
        });
  }
  return out;
}

inline int run_study(const io::RunConfig& c, const CommandOverrides& o = {}) {
  if (c.boundary.kind != io::BoundaryKind::laminate) throw io::ConfigError("study: boundary.kind must be laminate");
  if (!c.mesh.file.empty()) throw io::ConfigError("study: mesh.file is not supported, the study builds structured meshes");
  if (c.material.kappa != 0.0) throw io::ConfigError("study: material.kappa must be 0");
  if (c.study.levels.size() < 3) throw io::ConfigError("study.levels: at least three levels are required");
  const EnergyModel model = io::build_model(c);
  const LaminateSpec lam = io::build_laminate(c, model.wells);
  const std::filesystem::path dir = detail::output_dir(c, o);

  StudyOptions opts;
  opts.levels = c.study.levels;
  opts.domain = c.mesh.domain;
  opts.theta = c.theta;
  opts.band_scale = c.study.band_scale;
  opts.minimize = c.minimizer;
  opts.diagnostics = diagnostics_options(c);

  const StudyResult r = convergence_study(lam, model, opts, [&](const StudyLevel& l, const Triangulation& mesh,
                                                                const FilmState& st) {
    if (!o.quiet) {
      std::cerr << "study: " << l.cells << " cells, E = " << l.report.energy << ", " << l.report.iterations
                << " iterations" << (l.report.converged ? "" : " (not converged)") << "\n";
    }
    if (c.output.vtk) {
      const ScalarP0 theta = ScalarP0::constant(mesh.num_elements(), c.theta);
      const std::vector<int> phase = phase_indices(st, theta, model, mesh);
      io::write_atomic(dir / detail::step_name("level", l.cells), io::format_vtk(mesh, st, &theta, &phase));
    }
  });

  const std::vector<RatioTrend> trends = study_trends(r, c.study.functionals, 100.0 * c.minimizer.grad_tol);
  std::vector<std::string> head{"cells",          "h",           "initial_energy", "energy",
                                "iterations",     "grad_norm",   "converged",      "tau_other",
                                "local_fraction_i", "local_fraction_j", "local_error", "directional_error",
                                "l2_error",       "weak_deviation", "pi_residual"};
  for (const std::string& f : c.study.functionals) {
    head.push_back("gap_" + f);
    head.push_back("fnorm_" + f);
  }
  for (const RatioTrend& t : trends) head.push_back("ratio_" + t.name);
  io::CsvTable table(head);
  for (std::size_t l = 0; l < r.levels.size(); ++l) {
    const StudyLevel& lev = r.levels[l];
    const DiagnosticsReport& d = lev.diagnostics;
    std::vector<std::string> row{detail::itos(lev.cells),          detail::dtos(lev.h),
                                 detail::dtos(lev.initial_energy), detail::dtos(lev.report.energy),
                                 detail::itos(lev.report.iterations), detail::dtos(lev.report.grad_norm),
                                 lev.report.converged ? "1" : "0", detail::dtos(d.tau_other),
                                 detail::dtos(d.local.fraction_i), detail::dtos(d.local.fraction_j),
                                 detail::dtos(d.local_error),      detail::dtos(d.directional_error),
                                 detail::dtos(d.l2_error),         detail::dtos(d.weak_deviation),
                                 detail::dtos(d.pi_residual)};
    for (const FunctionalGap& g : d.gaps) {
      row.push_back(detail::dtos(g.gap));
      row.push_back(detail::dtos(g.f_norm));
    }
    for (const RatioTrend& t : trends) row.push_back(detail::dtos(t.ratio[l]));
    table.add_row(row);
  }
  io::write_atomic(dir / "study.csv", table.str());

  std::string summary = "energy_slope " + detail::dtos(r.energy_slope) + "\n";
  summary += "resolution_floor " + detail::dtos(100.0 * c.minimizer.grad_tol) + "\n";
  summary += "excluded_levels";
  for (int cells : r.excluded) summary += " " + std::to_string(cells);
  summary += "\n";
  for (const RatioTrend& t : trends) {
    summary += "ratio_growth_" + t.name + " " + detail::dtos(t.growth()) + "\n";
  }
  io::write_atomic(dir / "study_summary.txt", summary);
  if (!o.quiet) std::cerr << summary;
  return r.excluded.empty() ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

inline Schedule build_schedule(const io::RunConfig& c, std::size_t n_elements) {
  if (c.schedule.table.empty()) {
    return Schedule::ramp(c.schedule.temperatures, c.schedule.steps, c.schedule.dt, n_elements);
  }
  std::ifstream in(c.resolve(c.schedule.table));
  if (!in) throw io::ConfigError("schedule.table: cannot open " + c.resolve(c.schedule.table).string());
  return io::read_temperature_table(in, n_elements);
}

inline NucleationPolicy build_policy(const io::RunConfig& c) {
  NucleationPolicy p;
  p.enabled = c.nucleation.enabled;
  p.heating = {c.nucleation.center, c.nucleation.width};
  if (c.nucleation.cooling) p.cooling = Logistic{c.nucleation.cooling_center, c.nucleation.cooling_width};
  p.seed = c.nucleation.seed;
  p.prohibit_austenite_to_martensite_on_heating = c.nucleation.prohibit_austenite_to_martensite_on_heating;
  p.prohibit_martensite_to_austenite_on_cooling = c.nucleation.prohibit_martensite_to_austenite_on_cooling;
  return p;
}

inline int run_evolve(const io::RunConfig& c, const CommandOverrides& o = {}) {
  RunSetup s = build_setup(c);
  const std::filesystem::path dir = detail::output_dir(c, o);
  const Schedule schedule = build_schedule(c, s.mesh.num_elements());
  NucleationPolicy policy = build_policy(c);
  if (o.seed) policy.seed = *o.seed;

  bool all_converged = true;
  FilmState start = s.initial;
  if (c.initial.relax) {
    MinimizeResult r0 = minimize(s.initial, schedule.theta[0], s.model, s.mesh, s.node_mask, c.minimizer);
    all_converged = r0.report.converged;
    start = std::move(r0.state);
  }

  std::vector<std::string> head{"step", "time", "theta", "energy", "nucleated_energy", "austenite_fraction"};
  for (std::size_t k = 0; k < s.model.wells.size(); ++k) head.push_back("tau_" + std::to_string(k + 1));
  for (const char* col : {"cg_iterations", "converged", "transformed"}) head.push_back(col);
  io::CsvTable trajectory(head);

  auto observer = [&](const StepRecord& r) {
    std::vector<std::string> row{detail::itos(r.step),         detail::dtos(r.time),
                                 detail::dtos(r.theta_mean),   detail::dtos(r.report.energy),
                                 detail::dtos(r.nucleated_energy), detail::dtos(r.fractions.austenite)};
    for (double v : r.fractions.variant) row.push_back(detail::dtos(v));
    row.push_back(detail::itos(r.report.iterations));
    row.push_back(r.report.converged ? "1" : "0");
    row.push_back(detail::itos(r.transformed));
    trajectory.add_row(row);
    if (!r.report.converged) all_converged = false;

    const ScalarP0& theta = schedule.theta[static_cast<std::size_t>(r.step)];
    if (c.output.vtk && r.step % c.output.every == 0) {
      const std::vector<int> phase = phase_indices(r.state, theta, s.model, s.mesh);
      io::write_atomic(dir / detail::step_name("state", r.step), io::format_vtk(s.mesh, r.state, &theta, &phase));
    }
    io::write_atomic(dir / "trajectory.csv", trajectory.str());
    if (!o.quiet) {
      std::cerr << "evolve: step " << r.step << " theta " << r.theta_mean << " E " << r.report.energy
                << " austenite " << r.fractions.austenite << "\n";
    }
  };
  evolve(start, schedule, policy, s.model, s.mesh, s.node_mask, c.minimizer, observer, false);
  return all_converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------------------
// Entry points taking a config path
// ---------------------------------------------------------------------------

inline int cmd_minimize(const std::filesystem::path& config, const CommandOverrides& o = {}) {
  return detail::guarded([&] { return run_minimize(io::load_config(config), o); });
}

inline int cmd_study(const std::filesystem::path& config, const CommandOverrides& o = {}) {
  return detail::guarded([&] { return run_study(io::load_config(config), o); });
}

inline int cmd_evolve(const std::filesystem::path& config, const CommandOverrides& o = {}) {
  return detail::guarded([&] { return run_evolve(io::load_config(config), o); });
}

}  // namespace marten
