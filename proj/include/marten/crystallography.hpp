#pragma once

#include "marten/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace marten {

// ---------------------------------------------------------------------------
// Point groups
// ---------------------------------------------------------------------------

enum class Symmetry { cubic, tetragonal, orthorhombic };

inline std::string_view to_string(Symmetry s) {
  switch (s) {
    case Symmetry::cubic: return "cubic";
    case Symmetry::tetragonal: return "tetragonal";
    case Symmetry::orthorhombic: return "orthorhombic";
  }
  return "unknown";
}

inline Symmetry symmetry_from_string(std::string_view name) {
  if (name == "cubic") return Symmetry::cubic;
  if (name == "tetragonal") return Symmetry::tetragonal;
  if (name == "orthorhombic") return Symmetry::orthorhombic;
  throw InvalidInput("unknown point group '" + std::string(name) + "'");
}

/// Proper rotations of a crystal point group, listed explicitly.
///
/// The cubic group is the 24 signed permutation matrices with unit
/// determinant; the tetragonal (c along x3) and orthorhombic groups are the
/// subgroups fixing the x3 axis up to sign and the coordinate axes
/// respectively. The identity is always the first element.
struct PointGroup {
  Symmetry name = Symmetry::cubic;
  std::vector<Matrix3> rotations;

  static PointGroup make(Symmetry s) {
    PointGroup g;
    g.name = s;
    std::array<int, 3> perm{0, 1, 2};
    do {
      for (int signs = 0; signs < 8; ++signs) {
        Matrix3 r = Matrix3::Zero();
        for (int row = 0; row < 3; ++row) {
          r(row, perm[row]) = (signs >> row) & 1 ? -1.0 : 1.0;
        }
        if (r.determinant() < 0.0) continue;
        const bool keeps_c = std::abs(r(2, 2)) == 1.0;
        const bool diagonal = r.isDiagonal();
        if (s == Symmetry::tetragonal && !keeps_c) continue;
        if (s == Symmetry::orthorhombic && !diagonal) continue;
        g.rotations.push_back(r);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return g;
  }
};

// ---------------------------------------------------------------------------
// Wells
// ---------------------------------------------------------------------------

/// Martensitic variants U_1..U_N, optionally augmented by the austenite well
/// SO(3). Indices are zero-based; `kAustenite` labels the austenite well.
struct WellSet {
  static constexpr int kAustenite = -1;

  std::vector<Matrix3> variants;
  bool includes_austenite = false;

  std::size_t size() const { return variants.size(); }
  const Matrix3& operator[](std::size_t k) const { return variants[k]; }
};

inline bool is_spd(const Matrix3& u, double sym_tol = 1e-12) {
  if (!u.allFinite()) return false;
  const double scale = std::max(1.0, u.cwiseAbs().maxCoeff());
  if ((u - u.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale) return false;
  Eigen::SelfAdjointEigenSolver<Matrix3> es(u, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0.0;
}

/// Orbit {R^T U1 R : R in G}, deduplicated at Frobenius distance 1e-10.
///
/// U1 stays first; the remaining variants are ordered by descending
/// lexicographic comparison of their entries so the numbering does not depend
/// on the enumeration order of the group.
inline WellSet generate_variants(const Matrix3& u1, const PointGroup& group) {
  if (!is_spd(u1)) throw InvalidInput("generate_variants: U1 must be symmetric positive definite");
  std::vector<Matrix3> orbit{u1};
  for (const Matrix3& r : group.rotations) {
    const Matrix3 v = r.transpose() * u1 * r;
    const bool seen = std::any_of(orbit.begin(), orbit.end(),
                                  [&](const Matrix3& w) { return (w - v).norm() < 1e-10; });
    if (!seen) orbit.push_back(v);
  }
  std::sort(orbit.begin() + 1, orbit.end(), [](const Matrix3& a, const Matrix3& b) {
    for (int k = 0; k < 9; ++k) {
      const double x = a(k / 3, k % 3);
      const double y = b(k / 3, k % 3);
      if (x != y) return x > y;
    }
    return false;
  });
  WellSet w;
  w.variants = std::move(orbit);
  return w;
}

// ---------------------------------------------------------------------------
// Rotations and well distances
// ---------------------------------------------------------------------------

/// R in SO(3) maximizing trace(R^T M).
///
/// Procrustes solution M = U S V^T, R = U diag(1, 1, det(U V^T)) V^T. Eigen's
/// JacobiSVD orders singular values decreasingly, so the sign correction always
/// lands on the smallest one; for repeated singular values the rotation
/// returned is whichever the (deterministic) Jacobi sweep produces.
inline Matrix3 closest_rotation(const Matrix3& m) {
  Eigen::JacobiSVD<Matrix3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix3& u = svd.matrixU();
  const Matrix3& v = svd.matrixV();
  const double d = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return u * Eigen::Vector3d(1.0, 1.0, d).asDiagonal() * v.transpose();
}

struct WellDistance {
  double distance = 0.0;
  Matrix3 rotation = Matrix3::Identity();
};

/// min over R in SO(3) of ||F - R U||, with the minimizing R.
inline WellDistance dist_to_well(const Matrix3& f, const Matrix3& u) {
  WellDistance out;
  out.rotation = closest_rotation(f * u.transpose());
  out.distance = (f - out.rotation * u).norm();
  return out;
}

struct Projection {
  int index = 0;  ///< variant index, or WellSet::kAustenite
  double distance = 0.0;
  Matrix3 rotation = Matrix3::Identity();
  Matrix3 projected = Matrix3::Identity();
};

/// Nearest point of the well set. Ties go to austenite first, then to the
/// lowest variant index.
inline Projection project_pi(const Matrix3& f, const WellSet& wells) {
  if (wells.size() == 0 && !wells.includes_austenite) throw InvalidInput("project_pi: empty well set");
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  if (wells.includes_austenite) {
    const WellDistance d = dist_to_well(f, Matrix3::Identity());
    best = {WellSet::kAustenite, d.distance, d.rotation, d.rotation};
  }
  for (std::size_t k = 0; k < wells.size(); ++k) {
    const WellDistance d = dist_to_well(f, wells[k]);
    if (d.distance < best.distance) {
      best = {static_cast<int>(k), d.distance, d.rotation, d.rotation * wells[k]};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Twins and laminates
// ---------------------------------------------------------------------------

/// One solution (Q, a, n) of Q U_i = U_j + a (x) n with |n| = 1.
struct TwinSolution {
  Matrix3 Q = Matrix3::Identity();
  Vector3 a = Vector3::Zero();
  Vector3 n = Vector3::UnitX();
};

/// Simple laminate of Q U_i (volume fraction lambda) and U_j.
struct LaminateSpec {
  int i = 0;
  int j = 1;
  Matrix3 Ui = Matrix3::Identity();
  Matrix3 Uj = Matrix3::Identity();
  Matrix3 Q = Matrix3::Identity();
  Vector3 a = Vector3::Zero();
  Vector3 n = Vector3::UnitX();
  double lambda = 0.5;

  Matrix3 QUi() const { return Q * Ui; }
  /// Gradient of the affine boundary data y0.
  Matrix3 mean_gradient() const { return lambda * Q * Ui + (1.0 - lambda) * Uj; }

  double rank_one_residual() const { return (Q * Ui - Uj - a * n.transpose()).norm(); }
};

/// All rank-one connections between the wells SO(3)U_i and U_j.
///
/// With G = U_i U_j^{-1} and C = G^T G = U_j^{-1} U_i^2 U_j^{-1} having
/// eigenvalues l1 <= l2 <= l3, solutions exist iff l2 = 1 (to 1e-9) and
/// C != I. For kappa = +-1,
///   a = rho (sqrt(l3 (1 - l1) / (l3 - l1)) e1 + kappa sqrt(l1 (l3 - 1) / (l3 - l1)) e3)
///   m = (sqrt(l3) - sqrt(l1)) / (rho sqrt(l3 - l1)) (-sqrt(1 - l1) e1 + kappa sqrt(l3 - 1) e3)
/// solve Q G = I + a (x) m, hence Q U_i = U_j + a (x) (U_j m). The solutions are
/// returned with kappa = +1 first; a coinciding pair (l1 = 1 or l3 = 1) is
/// returned once.
inline std::vector<TwinSolution> solve_twin(const Matrix3& ui, const Matrix3& uj) {
  if (!is_spd(ui) || !is_spd(uj)) throw InvalidInput("solve_twin: U_i and U_j must be symmetric positive definite");
  constexpr double kTol = 1e-9;
  const Matrix3 uj_inv = uj.inverse();
  const Matrix3 c = uj_inv.transpose() * ui * ui * uj_inv;
  Eigen::SelfAdjointEigenSolver<Matrix3> es(0.5 * (c + c.transpose()));
  const Vector3 lam = es.eigenvalues();
  const Matrix3 vecs = es.eigenvectors();
  std::vector<TwinSolution> out;
  if (std::abs(lam(1) - 1.0) > kTol) return out;
  if (std::abs(lam(0) - 1.0) <= kTol && std::abs(lam(2) - 1.0) <= kTol) return out;  // C = I
  const double l1 = std::min(lam(0), 1.0);
  const double l3 = std::max(lam(2), 1.0);
  const Vector3 e1 = vecs.col(0);
  const Vector3 e3 = vecs.col(2);
  for (double kappa : {1.0, -1.0}) {
    Vector3 a = std::sqrt(l3 * (1.0 - l1) / (l3 - l1)) * e1 + kappa * std::sqrt(l1 * (l3 - 1.0) / (l3 - l1)) * e3;
    Vector3 m = (std::sqrt(l3) - std::sqrt(l1)) / std::sqrt(l3 - l1) *
                (-std::sqrt(1.0 - l1) * e1 + kappa * std::sqrt(l3 - 1.0) * e3);
    // Q U_i = U_j + a (x) (U_j m); fold |U_j m| into a.
    Vector3 n = uj.transpose() * m;
    const double nn = n.norm();
    if (nn == 0.0) continue;
    n /= nn;
    a *= nn;
    TwinSolution s;
    s.a = a;
    s.n = n;
    s.Q = (uj + a * n.transpose()) * ui.inverse();
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const TwinSolution& t) {
      return (t.a * t.n.transpose() - a * n.transpose()).norm() < 1e-10;
    });
    if (duplicate) continue;
    const double orth = (s.Q.transpose() * s.Q - Matrix3::Identity()).norm();
    if (orth > 1e-8 || s.Q.determinant() <= 0.0) continue;
    out.push_back(s);
  }
  return out;
}

inline LaminateSpec make_laminate(const WellSet& wells, int i, int j, const TwinSolution& twin, double lambda) {
  if (i == j) throw InvalidInput("laminate requires i != j");
  if (i < 0 || j < 0 || static_cast<std::size_t>(std::max(i, j)) >= wells.size())
    throw InvalidInput("laminate variant index out of range");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("laminate volume fraction must lie in [0, 1]");
  LaminateSpec s;
  s.i = i;
  s.j = j;
  s.Ui = wells[static_cast<std::size_t>(i)];
  s.Uj = wells[static_cast<std::size_t>(j)];
  s.Q = twin.Q;
  s.a = twin.a;
  s.n = twin.n;
  s.lambda = lambda;
  return s;
}

/// Decomposition pi_ij(F) = Theta(F) Pi(F) with Pi(F) in {Q U_i, U_j}.
struct LaminateProjection {
  Matrix3 Theta = Matrix3::Identity();
  Matrix3 Pi = Matrix3::Identity();
  bool near_i = true;
  double distance = 0.0;
};

/// Ties between the two wells go to U_i.
inline LaminateProjection project_pi_ij(const Matrix3& f, const LaminateSpec& lam) {
  if (lam.i == lam.j) throw InvalidInput("project_pi_ij: i == j");
  const WellDistance di = dist_to_well(f, lam.Ui);
  const WellDistance dj = dist_to_well(f, lam.Uj);
  LaminateProjection p;
  if (di.distance <= dj.distance) {
    p.near_i = true;
    p.Pi = lam.Q * lam.Ui;
    p.Theta = di.rotation * lam.Q.transpose();
    p.distance = di.distance;
  } else {
    p.near_i = false;
    p.Pi = lam.Uj;
    p.Theta = dj.rotation;
    p.distance = dj.distance;
  }
  return p;
}

}  // namespace marten
