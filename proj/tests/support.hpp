#pragma once

// Shared helpers for the test programs: random matrices and independent
// reference computations that do not call into the library numerics.

#include "marten/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <utility>
#include <vector>

namespace marten::testing {

inline Matrix3 quaternion_rotation(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n; x /= n; y /= n; z /= n;
  Matrix3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

inline Matrix3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return quaternion_rotation(g(rng), g(rng), g(rng), g(rng));
}

inline Matrix3 random_matrix(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix3 m;
  for (int k = 0; k < 9; ++k) m(k / 3, k % 3) = u(rng);
  return m;
}

/// Symmetric with eigenvalues in [lo, hi].
inline Matrix3 random_spd(std::mt19937_64& rng, double lo = 0.8, double hi = 1.2) {
  std::uniform_real_distribution<double> u(lo, hi);
  const Matrix3 r = random_rotation(rng);
  return r * Vector3(u(rng), u(rng), u(rng)).asDiagonal() * r.transpose();
}

inline Vector3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector3 v(g(rng), g(rng), g(rng));
  return v.normalized();
}

/// Radical inverse of i in base b.
inline double halton(std::uint64_t i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

/// Quasi-uniform SO(3) grid: Halton points pushed through Shoemake's
/// uniform quaternion map.
inline std::vector<Matrix3> rotation_grid(std::size_t n) {
  std::vector<Matrix3> out;
  out.reserve(n);
  constexpr double two_pi = 6.283185307179586;
  for (std::size_t i = 1; i <= n; ++i) {
    const double u1 = halton(i, 2), u2 = halton(i, 3), u3 = halton(i, 5);
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    out.push_back(quaternion_rotation(a * std::sin(two_pi * u2), a * std::cos(two_pi * u2), b * std::sin(two_pi * u3),
                                      b * std::cos(two_pi * u3)));
  }
  return out;
}

/// Rotation angle between two rotations.
inline double rotation_angle(const Matrix3& a, const Matrix3& b) {
  const double c = std::clamp(0.5 * ((a.transpose() * b).trace() - 1.0), -1.0, 1.0);
  return std::acos(c);
}

/// Largest angle from any of `probes` to its nearest grid rotation, an
/// empirical covering radius.
inline double grid_covering_angle(const std::vector<Matrix3>& grid, const std::vector<Matrix3>& probes) {
  double worst = 0.0;
  for (const Matrix3& p : probes) {
    double best = 10.0;
    for (const Matrix3& g : grid) best = std::min(best, rotation_angle(p, g));
    worst = std::max(worst, best);
  }
  return worst;
}

/// min over the grid of |F - R U|.
inline double grid_well_distance(const Matrix3& f, const Matrix3& u, const std::vector<Matrix3>& grid) {
  const Matrix3 m = f * u.transpose();
  double best = -1e300;
  for (const Matrix3& r : grid) best = std::max(best, r.cwiseProduct(m).sum());
  return std::sqrt(std::max(0.0, f.squaredNorm() + u.squaredNorm() - 2.0 * best));
}

/// Distance from F to SO(3) U through the singular values of M = F U^T, taken
/// as square roots of the eigenvalues of M^T M:
///   |F - R U|^2 = |F|^2 + |U|^2 - 2 tr(R^T M),  max_R tr(R^T M) = s1 + s2 + sign(det M) s3.
inline double eig_well_distance(const Matrix3& f, const Matrix3& u) {
  const Matrix3 m = f * u.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix3> es(m.transpose() * m, Eigen::EigenvaluesOnly);
  Vector3 s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();  // ascending
  const double sign = m.determinant() < 0.0 ? -1.0 : 1.0;
  const double best = s(2) + s(1) + sign * s(0);
  return std::sqrt(std::max(0.0, f.squaredNorm() + u.squaredNorm() - 2.0 * best));
}

/// Plain data for the independent energy: nodes, triangles and parameters,
/// with no library types beyond Eigen matrices.
struct NaiveFilm {
  std::vector<Vector2> nodes;
  std::vector<std::array<int, 3>> tris;
  std::vector<Vector3> y;
  std::vector<Vector3> b;
  std::vector<double> theta;
  std::vector<Matrix3> variants;
  bool austenite = true;
  double mu_a = 1, mu_m = 1, theta_T = 1, c_L = 1, kappa = 0, eps = 1e-4;
  Vector3 b0 = Vector3::UnitZ();
};

inline double naive_density(const Matrix3& f, double theta, const NaiveFilm& p) {
  const double inf = std::numeric_limits<double>::infinity();
  double aus = inf;
  if (p.austenite) {
    const double d = eig_well_distance(f, Matrix3::Identity());
    aus = p.mu_a * d * d + std::max(0.0, p.theta_T - theta) * p.c_L / p.theta_T;
  }
  double mart = inf;
  for (const Matrix3& u : p.variants) {
    const double d = eig_well_distance(f, u);
    mart = std::min(mart, p.mu_m * d * d + std::max(0.0, theta - p.theta_T) * p.c_L / p.theta_T);
  }
  return std::min(aus, mart);
}

/// Straightforward film energy: gradients from the 2x2 edge-vector system,
/// edges from a map over sorted node pairs, r(x) = sqrt(x^2 + eps^2) - eps.
inline double naive_film_energy(const NaiveFilm& p) {
  const std::size_t nk = p.tris.size();
  std::vector<Matrix3> grad(nk);
  double bulk = 0.0;
  for (std::size_t k = 0; k < nk; ++k) {
    const auto& t = p.tris[k];
    Eigen::Matrix2d dx;
    dx.col(0) = p.nodes[t[1]] - p.nodes[t[0]];
    dx.col(1) = p.nodes[t[2]] - p.nodes[t[0]];
    Matrix32 dy;
    dy.col(0) = p.y[t[1]] - p.y[t[0]];
    dy.col(1) = p.y[t[2]] - p.y[t[0]];
    grad[k].leftCols<2>() = dy * dx.inverse();
    grad[k].col(2) = p.b[k];
    const double area = 0.5 * std::abs(dx.determinant());
    bulk += area * naive_density(grad[k], p.theta[k], p);
  }
  if (p.kappa == 0.0) return bulk;
  std::map<std::pair<int, int>, std::vector<std::size_t>> sides;
  for (std::size_t k = 0; k < nk; ++k) {
    for (int s = 0; s < 3; ++s) {
      const int a = p.tris[k][s], c = p.tris[k][(s + 1) % 3];
      sides[{std::min(a, c), std::max(a, c)}].push_back(k);
    }
  }
  auto r = [&](double x) { return std::sqrt(x * x + p.eps * p.eps) - p.eps; };
  double surface = 0.0;
  for (const auto& [edge, ks] : sides) {
    const double len = (p.nodes[edge.first] - p.nodes[edge.second]).norm();
    if (ks.size() == 2) {
      const Matrix3 jump = grad[ks[0]] - grad[ks[1]];
      // (grad y | b | b): the director column counts twice
      const double mag = std::sqrt(jump.leftCols<2>().squaredNorm() + 2.0 * jump.col(2).squaredNorm());
      surface += r(mag) * len;
    } else {
      surface += std::sqrt(2.0) * r((p.b[ks[0]] - p.b0).norm()) * len;
    }
  }
  return bulk + p.kappa * surface;
}

}  // namespace marten::testing
