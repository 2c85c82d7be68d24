#pragma once

#include "marten/crystallography.hpp"
#include "marten/mesh.hpp"
#include "marten/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace marten {

/// Material and film parameters of the multi-well energy.
///
/// The density is the lower envelope of an austenite branch and a martensite
/// branch, each a quadratic distance to its wells plus a temperature offset:
///
///   phi(F, theta) = min( mu_a d^2(F, SO(3))      + max(0, theta_T - theta) c_L / theta_T,
///                        mu_m min_k d^2(F, SO(3) U_k) + max(0, theta - theta_T) c_L / theta_T )
///
/// so phi vanishes on SO(3) above theta_T and on the variants below it, and
/// grows quadratically away from the active wells with mu = min(mu_a, mu_m).
/// The large-strain coercivity exponent of the bulk theory is not modelled;
/// P1 deformations are continuous regardless.
struct EnergyModel {
  WellSet wells;
  double mu_a = 1.0;
  double mu_m = 1.0;
  double theta_T = 1.0;
  double c_L = 1.0;
  double kappa = 1e-3;
  double eps_reg = 1e-4;
  Vector3 b0 = Vector3::UnitZ();
  double gamma = 0.9;

  double mu() const { return std::min(mu_a, mu_m); }

  void validate() const {
    if (!(mu_a > 0.0 && mu_m > 0.0)) throw InvalidInput("moduli mu_a and mu_m must be positive");
    if (!(kappa >= 0.0)) throw InvalidInput("kappa must be non-negative");
    if (!(eps_reg > 0.0)) throw InvalidInput("eps_reg must be positive");
    if (!(theta_T > 0.0)) throw InvalidInput("theta_T must be positive");
    if (!(c_L >= 0.0)) throw InvalidInput("c_L must be non-negative");
    if (wells.size() == 0 && !wells.includes_austenite) throw InvalidInput("energy model has no wells");
  }

  double austenite_offset(double theta) const { return std::max(0.0, theta_T - theta) * c_L / theta_T; }
  double martensite_offset(double theta) const { return std::max(0.0, theta - theta_T) * c_L / theta_T; }
};

/// Active branch of the density at one point.
struct DensityEval {
  double value = 0.0;
  int well = WellSet::kAustenite;  ///< active well: kAustenite or variant index
  double modulus = 1.0;
  Matrix3 target = Matrix3::Identity();  ///< R U of the active well
};

/// Evaluates both branches; ties go to austenite, then to the lowest variant.
inline DensityEval evaluate_density(const Matrix3& f, double theta, const EnergyModel& m) {
  DensityEval best;
  best.value = std::numeric_limits<double>::infinity();
  if (m.wells.includes_austenite) {
    const WellDistance d = dist_to_well(f, Matrix3::Identity());
    best.value = m.mu_a * d.distance * d.distance + m.austenite_offset(theta);
    best.well = WellSet::kAustenite;
    best.modulus = m.mu_a;
    best.target = d.rotation;
  }
  const double offset_m = m.martensite_offset(theta);
  for (std::size_t k = 0; k < m.wells.size(); ++k) {
    const WellDistance d = dist_to_well(f, m.wells[k]);
    const double v = m.mu_m * d.distance * d.distance + offset_m;
    if (v < best.value) {
      best.value = v;
      best.well = static_cast<int>(k);
      best.modulus = m.mu_m;
      best.target = d.rotation * m.wells[k];
    }
  }
  return best;
}

inline double phi(const Matrix3& f, double theta, const EnergyModel& m) { return evaluate_density(f, theta, m).value; }

/// Gradient of the active branch, 2 mu (F - R U).
inline Matrix3 dphi_dF(const Matrix3& f, double theta, const EnergyModel& m) {
  const DensityEval e = evaluate_density(f, theta, m);
  return 2.0 * e.modulus * (f - e.target);
}

/// sqrt(x^2 + eps^2) - eps, written without cancellation.
inline double regularized_abs(double x, double eps) {
  const double x2 = x * x;
  return x2 / (std::sqrt(x2 + eps * eps) + eps);
}

struct EnergyTerms {
  double jumps = 0.0;     ///< sum over interior edges, before the kappa factor
  double boundary = 0.0;  ///< sqrt(2) sum over boundary edges, before kappa
  double bulk = 0.0;
  double total = 0.0;
};

struct FilmEvaluation {
  EnergyTerms terms;
  FieldP1 dy;  ///< dE/dy, including Dirichlet nodes
  FieldP0 db;
};

namespace detail {

inline void check_inputs(const FilmState& s, const ScalarP0& theta, const Triangulation& mesh) {
  check_state(s, mesh);
  if (static_cast<std::size_t>(theta.values.size()) != mesh.num_elements())
    throw InvalidInput("temperature field size does not match the mesh");
}

}  // namespace detail

/// Regularized discrete film energy and, optionally, its exact gradient.
///
///   E = kappa ( sum_int r(|[[(grad y|b|b)]]_e|) |e| + sqrt(2) sum_bnd r(|b - b0|) |e| )
///       + sum_K phi((grad y|b)_K, theta_K) |K|
///
/// with |[[(grad y|b|b)]]| = (|[[grad y]]|^2 + 2 |[[b]]|^2)^(1/2) and
/// r(x) = sqrt(x^2 + eps^2) - eps. Sums run in element then edge index order.
inline FilmEvaluation evaluate_film(const FilmState& s, const ScalarP0& theta, const EnergyModel& m,
                                    const Triangulation& mesh, bool with_gradient) {
  detail::check_inputs(s, theta, mesh);
  const std::size_t nk = mesh.num_elements();
  FilmEvaluation out;
  if (with_gradient) {
    out.dy.values = Eigen::Matrix3Xd::Zero(3, static_cast<Eigen::Index>(mesh.num_nodes()));
    out.db.values = Eigen::Matrix3Xd::Zero(3, static_cast<Eigen::Index>(nk));
  }
  std::vector<Matrix32> grads(nk);
  for (std::size_t k = 0; k < nk; ++k) {
    grads[k] = gradient_p1(mesh, s.y, k);
    Matrix3 f;
    f.leftCols<2>() = grads[k];
    f.col(2) = s.b.values.col(static_cast<Eigen::Index>(k));
    const DensityEval d = evaluate_density(f, theta.values(static_cast<Eigen::Index>(k)), m);
    const double area = mesh.area(k);
    out.terms.bulk += d.value * area;
    if (with_gradient) {
      const Matrix3 p = 2.0 * d.modulus * area * (f - d.target);
      const auto& t = mesh.triangle(k);
      const auto& g = mesh.shape_gradients(k);
      for (int a = 0; a < 3; ++a) out.dy.values.col(t[a]) += p.leftCols<2>() * g.row(a).transpose();
      out.db.values.col(static_cast<Eigen::Index>(k)) += p.col(2);
    }
  }

  if (m.kappa > 0.0) {
    const double eps = m.eps_reg;
    const double sqrt2 = std::sqrt(2.0);
    for (const Edge& e : mesh.edges()) {
      if (e.interior()) {
        const Matrix32 dg = grads[e.k1] - grads[e.k2];
        const Vector3 dbv = s.b.values.col(e.k1) - s.b.values.col(e.k2);
        const double j2 = dg.squaredNorm() + 2.0 * dbv.squaredNorm();
        out.terms.jumps += regularized_abs(std::sqrt(j2), eps) * e.length;
        if (with_gradient) {
          const double c = m.kappa * e.length / std::sqrt(j2 + eps * eps);
          // d r / d(dg) = dg / s,  d r / d(db) = 2 db / s
          const Matrix32 gy = c * dg;
          const Vector3 gb = 2.0 * c * dbv;
          for (int side = 0; side < 2; ++side) {
            const int k = side == 0 ? e.k1 : e.k2;
            const double sign = side == 0 ? 1.0 : -1.0;
            const auto& t = mesh.triangle(static_cast<std::size_t>(k));
            const auto& g = mesh.shape_gradients(static_cast<std::size_t>(k));
            for (int a = 0; a < 3; ++a) out.dy.values.col(t[a]) += sign * gy * g.row(a).transpose();
            out.db.values.col(k) += sign * gb;
          }
        }
      } else {
        const Vector3 diff = s.b.values.col(e.k1) - m.b0;
        const double x = diff.norm();
        out.terms.boundary += sqrt2 * regularized_abs(x, eps) * e.length;
        if (with_gradient) {
          out.db.values.col(e.k1) += m.kappa * sqrt2 * e.length / std::sqrt(x * x + eps * eps) * diff;
        }
      }
    }
  }
  out.terms.total = m.kappa * (out.terms.jumps + out.terms.boundary) + out.terms.bulk;
  return out;
}

inline double film_energy(const FilmState& s, const ScalarP0& theta, const EnergyModel& m, const Triangulation& mesh) {
  return evaluate_film(s, theta, m, mesh, false).terms.total;
}

struct FilmGradient {
  FieldP1 dy;
  FieldP0 db;
};

inline FilmGradient film_energy_gradient(const FilmState& s, const ScalarP0& theta, const EnergyModel& m,
                                         const Triangulation& mesh) {
  FilmEvaluation e = evaluate_film(s, theta, m, mesh, true);
  return {std::move(e.dy), std::move(e.db)};
}

}  // namespace marten
