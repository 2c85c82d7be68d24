#pragma once

#include "marten/crystallography.hpp"
#include "marten/energy.hpp"
#include "marten/mesh.hpp"
#include "marten/minimizer.hpp"
#include "marten/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace marten {

// ---------------------------------------------------------------------------
// Volume fractions
// ---------------------------------------------------------------------------

struct VolumeFractions {
  std::vector<double> variant;  ///< tau_k, one per martensitic variant
  double austenite = 0.0;
};

/// tau_k = meas{K : pi(grad y | b) in SO(3) U_k} / meas(Omega), classifying
/// each element by its nearest well.
inline VolumeFractions volume_fractions(const FilmState& s, const EnergyModel& m, const Triangulation& mesh) {
  check_state(s, mesh);
  VolumeFractions out;
  out.variant.assign(m.wells.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
    const Projection p = project_pi(assemble_F(mesh, s.y, s.b, k), m.wells);
    const double a = mesh.area(k);
    total += a;
    if (p.index == WellSet::kAustenite) {
      out.austenite += a;
    } else {
      out.variant[static_cast<std::size_t>(p.index)] += a;
    }
  }
  for (double& v : out.variant) v /= total;
  out.austenite /= total;
  return out;
}

/// Axis-aligned subdomain; elements belong to it by barycenter.
struct Subdomain {
  Rectangle box;

  std::vector<std::size_t> elements(const Triangulation& mesh) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
      if (box.contains(mesh.barycenter(k))) out.push_back(k);
    }
    if (out.empty()) throw InvalidInput("subdomain contains no elements");
    return out;
  }
};

struct LocalFractions {
  double fraction_i = 0.0;
  double fraction_j = 0.0;
};

/// meas(omega_rho^i) / meas(omega) and meas(omega_rho^j) / meas(omega).
inline LocalFractions local_volume_fractions(const FilmState& s, const LaminateSpec& lam, const Subdomain& omega,
                                             double rho, const Triangulation& mesh) {
  if (!(rho > 0.0)) throw InvalidInput("local_volume_fractions: rho must be positive");
  check_state(s, mesh);
  LocalFractions out;
  double total = 0.0;
  for (std::size_t k : omega.elements(mesh)) {
    const Matrix3 f = assemble_F(mesh, s.y, s.b, k);
    const LaminateProjection p = project_pi_ij(f, lam);
    const double a = mesh.area(k);
    total += a;
    if ((f - p.Pi).norm() <= rho) (p.near_i ? out.fraction_i : out.fraction_j) += a;
  }
  out.fraction_i /= total;
  out.fraction_j /= total;
  return out;
}

// ---------------------------------------------------------------------------
// Convergence diagnostics against the laminate boundary data
// ---------------------------------------------------------------------------

/// Integral of |(grad y - grad y0) w|^2 for a unit w orthogonal to n.
inline double directional_gradient_error(const FilmState& s, const LaminateSpec& lam, const Vector3& w,
                                         const Triangulation& mesh) {
  if (std::abs(w.norm() - 1.0) > 1e-12) throw InvalidInput("directional_gradient_error: w must be a unit vector");
  if (std::abs(w.dot(lam.n)) >= 1e-12) throw InvalidInput("directional_gradient_error: w must be orthogonal to n");
  check_state(s, mesh);
  const Matrix3 f0 = lam.mean_gradient();
  double sum = 0.0;
  for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
    sum += mesh.area(k) * ((assemble_F(mesh, s.y, s.b, k) - f0) * w).squaredNorm();
  }
  return sum;
}

/// Integral of |y - y0|^2 by the edge-midpoint rule (exact for quadratics).
inline double deformation_l2_error(const FilmState& s, const LaminateSpec& lam, const Triangulation& mesh) {
  check_state(s, mesh);
  const Matrix3 f0 = lam.mean_gradient();
  double sum = 0.0;
  for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
    const auto& t = mesh.triangle(k);
    double local = 0.0;
    for (int e = 0; e < 3; ++e) {
      const int p = t[e], q = t[(e + 1) % 3];
      const Vector2 mid = 0.5 * (mesh.node(p) + mesh.node(q));
      const Vector3 ym = 0.5 * (s.y.values.col(p) + s.y.values.col(q));
      local += (ym - affine_map(f0, mid)).squaredNorm();
    }
    sum += mesh.area(k) * local / 3.0;
  }
  return sum;
}

/// || integral over omega of (grad y - grad y0) ||.
inline double weak_gradient_deviation(const FilmState& s, const LaminateSpec& lam, const Subdomain& omega,
                                      const Triangulation& mesh) {
  check_state(s, mesh);
  const Matrix3 f0 = lam.mean_gradient();
  Matrix3 sum = Matrix3::Zero();
  for (std::size_t k : omega.elements(mesh)) sum += mesh.area(k) * (assemble_F(mesh, s.y, s.b, k) - f0);
  return sum.norm();
}

/// Integral of ||grad y - Pi(grad y)||^2 with Pi onto {Q U_i, U_j}.
inline double pi_oscillation_residual(const FilmState& s, const LaminateSpec& lam, const Triangulation& mesh) {
  check_state(s, mesh);
  double sum = 0.0;
  for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
    const Matrix3 f = assemble_F(mesh, s.y, s.b, k);
    sum += mesh.area(k) * (f - project_pi_ij(f, lam).Pi).squaredNorm();
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Test functionals f(x, F) = (c0 + c . x) p(F), p quadratic in the entries of F
// ---------------------------------------------------------------------------

class TestFunctional {
 public:
  using Vec9 = Eigen::Matrix<double, 9, 1>;
  using Mat9 = Eigen::Matrix<double, 9, 9>;

  std::string name;
  double c0 = 1.0;
  Vector2 cx = Vector2::Zero();
  double k0 = 0.0;
  Vec9 linear = Vec9::Zero();
  Mat9 quadratic = Mat9::Zero();  ///< symmetric

  static Vec9 flatten(const Matrix3& f) {
    Vec9 v;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) v(3 * r + c) = f(r, c);
    return v;
  }

  double weight(const Vector2& x) const { return c0 + cx.dot(x); }
  double p(const Matrix3& f) const {
    const Vec9 v = flatten(f);
    return k0 + linear.dot(v) + v.dot(quadratic * v);
  }
  /// Frobenius norm of the F-gradient of p.
  double grad_p_norm(const Matrix3& f) const { return (linear + 2.0 * quadratic * flatten(f)).norm(); }
  double operator()(const Vector2& x, const Matrix3& f) const { return weight(x) * p(f); }

  static TestFunctional constant(double value) {
    TestFunctional t;
    t.name = "const";
    t.k0 = value;
    return t;
  }
  static TestFunctional entry(int row, int col) {
    if (row < 0 || row > 2 || col < 0 || col > 2) throw InvalidInput("test functional entry index out of range");
    TestFunctional t;
    t.name = "F" + std::to_string(row + 1) + std::to_string(col + 1);
    t.linear(3 * row + col) = 1.0;
    return t;
  }
  static TestFunctional frobenius_squared() {
    TestFunctional t;
    t.name = "frob2";
    t.quadratic.setIdentity();
    return t;
  }
  static TestFunctional trace() {
    TestFunctional t;
    t.name = "trace";
    t.linear(0) = t.linear(4) = t.linear(8) = 1.0;
    return t;
  }

  /// "const", "F<r><c>" (1-based), "frob2", "trace".
  static TestFunctional from_name(const std::string& n) {
    if (n == "const") return constant(1.0);
    if (n == "frob2") return frobenius_squared();
    if (n == "trace") return trace();
    if (n.size() == 3 && n[0] == 'F' && n[1] >= '1' && n[1] <= '3' && n[2] >= '1' && n[2] <= '3')
      return entry(n[1] - '1', n[2] - '1');
    throw InvalidInput("unsupported test functional '" + n + "'");
  }
};

struct FunctionalGap {
  double gap = 0.0;
  double f_norm = 0.0;  ///< ||f||_V
};

/// Gap of int f(x, grad y) against the laminate average and the norm
///   ||f||_V^2 = int (sup_F |grad_F f|)^2 + |grad z_f . n|^2 + z_f^2,
/// z_f = f(x, Q U_i) - f(x, U_j). The supremum over F is taken over the
/// element gradients of the state together with the two well matrices.
inline FunctionalGap functional_gap(const FilmState& s, const LaminateSpec& lam, const TestFunctional& f,
                                    const Triangulation& mesh) {
  check_state(s, mesh);
  const Matrix3 fi = lam.QUi();
  const Matrix3& fj = lam.Uj;
  const double p_avg = lam.lambda * f.p(fi) + (1.0 - lam.lambda) * f.p(fj);
  const double dz = f.p(fi) - f.p(fj);
  double sup = std::max(f.grad_p_norm(fi), f.grad_p_norm(fj));
  FunctionalGap out;
  std::vector<Matrix3> grads(mesh.num_elements());
  for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
    grads[k] = assemble_F(mesh, s.y, s.b, k);
    sup = std::max(sup, f.grad_p_norm(grads[k]));
    out.gap += mesh.area(k) * f.weight(mesh.barycenter(k)) * (f.p(grads[k]) - p_avg);
  }
  const double dzn = dz * f.cx.dot(lam.n.head<2>());
  double norm2 = 0.0;
  for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
    const auto& t = mesh.triangle(k);
    double w2 = 0.0;  // int_K weight^2, edge-midpoint rule
    for (int e = 0; e < 3; ++e) {
      const double w = f.weight(0.5 * (mesh.node(t[e]) + mesh.node(t[(e + 1) % 3])));
      w2 += w * w;
    }
    w2 *= mesh.area(k) / 3.0;
    norm2 += sup * sup * w2 + dzn * dzn * mesh.area(k) + dz * dz * w2;
  }
  out.f_norm = std::sqrt(norm2);
  return out;
}

// ---------------------------------------------------------------------------
// Laminate initial iterates
// ---------------------------------------------------------------------------

/// Continuous laminate of period `period` along n blended into the boundary
/// data over a layer of width `layer` (0 disables the blend):
///   y = y0 + psi(x) a (g(n.x) - lambda n.x),  g' = 1 in Q U_i bands, 0 in U_j bands,
/// psi = min(1, dist(x, boundary) / layer). b is the third column of the band
/// gradient at the barycenter.
inline FilmState laminate_state(const Triangulation& mesh, const LaminateSpec& lam, double period, double layer,
                                double offset = 0.0) {
  if (!(period > 0.0)) throw InvalidInput("laminate period must be positive");
  double x0 = mesh.node(0).x(), x1 = x0, y0 = mesh.node(0).y(), y1 = y0;
  for (const Vector2& p : mesh.nodes()) {
    x0 = std::min(x0, p.x()); x1 = std::max(x1, p.x());
    y0 = std::min(y0, p.y()); y1 = std::max(y1, p.y());
  }
  const Vector2 n2 = lam.n.head<2>();
  const double lambda = lam.lambda;
  auto band = [&](double s) {
    const double u = (s - offset) / period;
    const double cell = std::floor(u);
    return (cell * lambda + std::min(u - cell, lambda)) * period;
  };
  auto in_i = [&](double s) {
    const double u = (s - offset) / period;
    return u - std::floor(u) < lambda;
  };
  const Matrix3 f0 = lam.mean_gradient();
  FilmState st;
  st.y = interpolate(mesh, [&](const Vector2& x) {
    const double s = n2.dot(x);
    double psi = 1.0;
    if (layer > 0.0) {
      const double dist = std::min({x.x() - x0, x1 - x.x(), x.y() - y0, y1 - x.y()});
      psi = std::clamp(dist / layer, 0.0, 1.0);
    }
    return Vector3(affine_map(f0, x) + psi * (band(s) - lambda * s) * lam.a);
  });
  st.b.values.resize(3, static_cast<Eigen::Index>(mesh.num_elements()));
  for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
    const bool i_band = in_i(n2.dot(mesh.barycenter(k)));
    st.b.values.col(static_cast<Eigen::Index>(k)) = (i_band ? lam.QUi() : lam.Uj).col(2);
  }
  return st;
}

// ---------------------------------------------------------------------------
// Diagnostics report and refinement study
// ---------------------------------------------------------------------------

struct DiagnosticsOptions {
  Subdomain omega{{0.25, 0.25, 0.75, 0.75}};
  double rho = 0.1;
  std::optional<Vector3> w;  ///< defaults to a unit vector orthogonal to n and e3
  std::vector<TestFunctional> functionals{TestFunctional::entry(0, 0), TestFunctional::frobenius_squared(),
                                          TestFunctional::trace()};
};

inline Vector3 default_tangent(const Vector3& n) {
  Vector3 w = n.cross(Vector3::UnitZ());
  if (w.norm() < 1e-12) w = n.cross(Vector3::UnitX());
  return w.normalized();
}

struct DiagnosticsReport {
  double energy = 0.0;
  VolumeFractions tau;
  LocalFractions local;
  double local_error = 0.0;  ///< |f_i - lambda| + |f_j - (1 - lambda)|
  double directional_error = 0.0;
  double l2_error = 0.0;
  double weak_deviation = 0.0;
  double pi_residual = 0.0;
  std::vector<FunctionalGap> gaps;
  double tau_other = 0.0;  ///< largest tau_k over variants outside the laminate pair
};

inline DiagnosticsReport diagnose(const FilmState& s, const LaminateSpec& lam, const EnergyModel& m,
                                  const Triangulation& mesh, const ScalarP0& theta, const DiagnosticsOptions& opts) {
  DiagnosticsReport r;
  r.energy = film_energy(s, theta, m, mesh);
  r.tau = volume_fractions(s, m, mesh);
  for (std::size_t k = 0; k < r.tau.variant.size(); ++k) {
    if (static_cast<int>(k) != lam.i && static_cast<int>(k) != lam.j) r.tau_other = std::max(r.tau_other, r.tau.variant[k]);
  }
  r.local = local_volume_fractions(s, lam, opts.omega, opts.rho, mesh);
  r.local_error = std::abs(r.local.fraction_i - lam.lambda) + std::abs(r.local.fraction_j - (1.0 - lam.lambda));
  r.directional_error = directional_gradient_error(s, lam, opts.w.value_or(default_tangent(lam.n)), mesh);
  r.l2_error = deformation_l2_error(s, lam, mesh);
  r.weak_deviation = weak_gradient_deviation(s, lam, opts.omega, mesh);
  r.pi_residual = pi_oscillation_residual(s, lam, mesh);
  for (const TestFunctional& f : opts.functionals) r.gaps.push_back(functional_gap(s, lam, f, mesh));
  return r;
}

/// Least-squares slope of log(y) against log(x), skipping non-positive data.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::nan("");
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? std::nan("") : (n * sxy - sx * sy) / den;
}

struct StudyOptions {
  std::vector<int> levels{8, 16, 32, 64};  ///< cells per side of the unit square
  Rectangle domain{};
  double theta = 0.5;
  double band_scale = 1.0;  ///< band period = band_scale * sqrt(h)
  MinimizeOptions minimize;
  DiagnosticsOptions diagnostics;
};

struct StudyLevel {
  int cells = 0;
  double h = 0.0;
  double initial_energy = 0.0;
  MinimizeReport report;
  DiagnosticsReport diagnostics;
};

struct StudyResult {
  std::vector<StudyLevel> levels;
  double energy_slope = 0.0;  ///< fitted over converged levels only
  std::vector<int> excluded;  ///< cell counts of non-convergent levels
};

/// Right-hand-side functions of the stability estimates, as functions of E.
struct EstimateScales {
  static double strong(double e) { return e + std::sqrt(e); }     // E + E^1/2
  static double weak(double e) { return std::pow(e, 0.125) + std::sqrt(e); }  // E^1/8 + E^1/2
  static double functional(double e) { return std::pow(e, 0.25) + std::sqrt(e); }  // E^1/4 + E^1/2
};

/// Energy and diagnostics of minimized laminates on nested structured meshes.
///
/// Each level starts from `laminate_state` with period band_scale * sqrt(h)
/// and a boundary layer of one period, and is minimized with kappa = 0.
inline StudyResult convergence_study(const LaminateSpec& lam, const EnergyModel& model, const StudyOptions& opts,
                                     const std::function<void(const StudyLevel&, const Triangulation&, const FilmState&)>&
                                         on_level = {}) {
  if (opts.levels.size() < 3) throw InvalidInput("convergence_study needs at least three mesh levels");
  if (model.kappa != 0.0) throw InvalidInput("convergence_study requires kappa = 0");
  for (std::size_t l = 1; l < opts.levels.size(); ++l) {
    if (opts.levels[l] <= opts.levels[l - 1]) throw InvalidInput("convergence_study levels must be increasing");
  }
  StudyResult out;
  std::vector<double> hs, es;
  for (int cells : opts.levels) {
    const Triangulation mesh = structured_mesh(cells, cells, opts.domain);
    StudyLevel lev;
    lev.cells = cells;
    lev.h = mesh.h();
    const double period = opts.band_scale * std::sqrt(lev.h);
    FilmState init = laminate_state(mesh, lam, period, period);
    const ScalarP0 theta = ScalarP0::constant(mesh.num_elements(), opts.theta);
    lev.initial_energy = film_energy(init, theta, model, mesh);
    MinimizeResult res = minimize(init, theta, model, mesh, mesh.boundary_mask(), opts.minimize);
    lev.report = res.report;
    lev.diagnostics = diagnose(res.state, lam, model, mesh, theta, opts.diagnostics);
    if (lev.report.converged) {
      hs.push_back(lev.h);
      es.push_back(lev.report.energy);
    } else {
      out.excluded.push_back(cells);
    }
    if (on_level) on_level(lev, mesh, res.state);
    out.levels.push_back(std::move(lev));
  }
  out.energy_slope = loglog_slope(hs, es);
  return out;
}

}  // namespace marten
