#pragma once

#include "marten/energy.hpp"
#include "marten/mesh.hpp"
#include "marten/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace marten {

struct LineSearchOptions {
  double initial_step = 1e-2;  ///< first trial step, as a max-norm displacement
  double contraction = 0.5;
  double armijo = 1e-4;
  int max_backtracks = 40;
};

struct MinimizeOptions {
  double grad_tol = 1e-8;  ///< stop when |g|_inf <= grad_tol (1 + |E|)
  int max_iters = 5000;
  int restart_period = 0;  ///< 0 selects max(50, free unknowns / 10)
  LineSearchOptions line_search;

  void validate() const {
    if (!(grad_tol > 0.0)) throw InvalidInput("grad_tol must be positive");
    if (max_iters < 1) throw InvalidInput("max_iters must be >= 1");
    if (restart_period < 0) throw InvalidInput("restart_period must be >= 0");
    if (!(line_search.contraction > 0.0 && line_search.contraction < 1.0)) throw InvalidInput("contraction must lie in (0, 1)");
    if (!(line_search.armijo > 0.0 && line_search.armijo < 1.0)) throw InvalidInput("armijo constant must lie in (0, 1)");
    if (!(line_search.initial_step > 0.0)) throw InvalidInput("initial_step must be positive");
    if (line_search.max_backtracks < 1) throw InvalidInput("max_backtracks must be >= 1");
  }
};

struct MinimizeReport {
  int iterations = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  std::vector<double> energy_history;
  bool converged = false;
  std::string message;
};

/// One row of the iteration log.
struct IterationRecord {
  int iter = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

using IterationLog = std::function<void(const IterationRecord&)>;

namespace detail {

inline double masked_inf_norm(const Eigen::VectorXd& g) { return g.size() ? g.cwiseAbs().maxCoeff() : 0.0; }

inline void check_energy(double e, const char* where) {
  if (std::isnan(e) || std::isinf(e)) throw NumericalFailure(std::string("non-finite energy at ") + where);
}

}  // namespace detail

/// Polak-Ribiere (PR+) nonlinear conjugate gradient with a backtracking Armijo
/// line search.
///
/// `Objective` provides `double value(const VectorXd&)` and
/// `double value_and_gradient(const VectorXd&, VectorXd&)`. Coordinates with
/// `fixed[i] != 0` never move. The direction is reset to steepest descent
/// every restart period and whenever it fails to be a descent direction; a
/// line search that fails from a steepest-descent direction ends the run
/// with `converged = false`.
template <class Objective>
MinimizeReport minimize_pr_cg(Objective& obj, Eigen::VectorXd& x, const std::vector<char>& fixed,
                              const MinimizeOptions& opts, const IterationLog& log = {}) {
  opts.validate();
  const Eigen::Index n = x.size();
  if (static_cast<Eigen::Index>(fixed.size()) != n) throw InvalidInput("minimize: mask size mismatch");
  Eigen::VectorXd free_mask(n);
  Eigen::Index n_free = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    free_mask(i) = fixed[static_cast<std::size_t>(i)] ? 0.0 : 1.0;
    n_free += fixed[static_cast<std::size_t>(i)] ? 0 : 1;
  }
  const int restart_period =
      opts.restart_period > 0 ? opts.restart_period : std::max<int>(50, static_cast<int>(n_free / 10));
  const LineSearchOptions& ls = opts.line_search;

  MinimizeReport rep;
  Eigen::VectorXd g(n), g_new(n), d(n), x_trial(n), x_alt(n);
  double e = obj.value_and_gradient(x, g);
  detail::check_energy(e, "initial iterate");
  g = g.cwiseProduct(free_mask);
  rep.energy_history.push_back(e);
  d = -g;
  double alpha_prev = 0.0;
  double slope_prev = 0.0;
  int since_restart = 0;
  bool steepest = true;

  for (;;) {
    const double gnorm = detail::masked_inf_norm(g);
    rep.grad_norm = gnorm;
    rep.energy = e;
    if (gnorm <= opts.grad_tol * (1.0 + std::abs(e))) {
      rep.converged = true;
      rep.message = "gradient tolerance reached";
      break;
    }
    if (rep.iterations >= opts.max_iters) {
      rep.message = "iteration limit reached";
      break;
    }

    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      d = -g;
      slope = -g.squaredNorm();
      steepest = true;
      since_restart = 0;
    }

    const double dmax = detail::masked_inf_norm(d);
    double alpha = alpha_prev > 0.0 ? alpha_prev * slope_prev / slope : ls.initial_step / dmax;
    if (!(alpha > 0.0) || !std::isfinite(alpha)) alpha = ls.initial_step / dmax;

    // Backtracking Armijo search; each contraction is the minimizer of the
    // quadratic through E(0), E'(0), E(alpha), clamped to [0.1, contraction].
    // An accepted first trial gets one quadratic refinement.
    bool accepted = false;
    double e_trial = e;
    for (int bt = 0; bt <= ls.max_backtracks; ++bt) {
      x_trial = x + alpha * d;
      e_trial = obj.value(x_trial);
      if (std::isnan(e_trial)) throw NumericalFailure("non-finite energy during line search");
      if (e_trial <= e + ls.armijo * alpha * slope) {
        accepted = true;
        if (bt == 0) {
          const double curv = e_trial - e - alpha * slope;
          if (curv > 0.0) {
            const double alpha_q = std::min(-slope * alpha * alpha / (2.0 * curv), 4.0 * alpha);
            if (std::abs(alpha_q - alpha) > 0.1 * alpha) {
              x_alt = x + alpha_q * d;
              const double e_alt = obj.value(x_alt);
              if (std::isnan(e_alt)) throw NumericalFailure("non-finite energy during line search");
              if (e_alt < e_trial && e_alt <= e + ls.armijo * alpha_q * slope) {
                x_trial.swap(x_alt);
                e_trial = e_alt;
                alpha = alpha_q;
              }
            }
          }
        }
        break;
      }
      const double curv = e_trial - e - alpha * slope;
      double factor = ls.contraction;
      if (std::isfinite(e_trial) && curv > 0.0) factor = std::clamp(-slope * alpha / (2.0 * curv), 0.1, ls.contraction);
      alpha *= factor;
    }

    if (!accepted) {
      if (steepest) {
        rep.message = "line search failed along steepest descent";
        break;
      }
      d = -g;
      steepest = true;
      since_restart = 0;
      alpha_prev = 0.0;
      continue;
    }

    x.swap(x_trial);
    e = obj.value_and_gradient(x, g_new);
    detail::check_energy(e, "accepted iterate");
    g_new = g_new.cwiseProduct(free_mask);
    ++rep.iterations;
    ++since_restart;
    rep.energy_history.push_back(e);
    if (log) log({rep.iterations, e, detail::masked_inf_norm(g_new), alpha * dmax});

    double beta = 0.0;
    if (since_restart < restart_period) {
      beta = std::max(0.0, g_new.dot(g_new - g) / g.squaredNorm());
    } else {
      since_restart = 0;
    }
    alpha_prev = alpha;
    slope_prev = slope;
    d = -g_new + beta * d;
    steepest = beta == 0.0;
    g.swap(g_new);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Film minimization
// ---------------------------------------------------------------------------

/// Packs (y, b) as [y_0, ..., y_{nn-1}, b_0, ..., b_{ne-1}] with three
/// components each.
inline Eigen::VectorXd pack(const FilmState& s) {
  const Eigen::Index ny = s.y.values.size();
  const Eigen::Index nb = s.b.values.size();
  Eigen::VectorXd x(ny + nb);
  x.head(ny) = Eigen::Map<const Eigen::VectorXd>(s.y.values.data(), ny);
  x.tail(nb) = Eigen::Map<const Eigen::VectorXd>(s.b.values.data(), nb);
  return x;
}

inline void unpack(const Eigen::VectorXd& x, FilmState& s) {
  const Eigen::Index ny = s.y.values.size();
  const Eigen::Index nb = s.b.values.size();
  Eigen::Map<Eigen::VectorXd>(s.y.values.data(), ny) = x.head(ny);
  Eigen::Map<Eigen::VectorXd>(s.b.values.data(), nb) = x.tail(nb);
}

/// Adapter exposing the film energy to `minimize_pr_cg`.
class FilmObjective {
 public:
  FilmObjective(FilmState shape, const ScalarP0& theta, const EnergyModel& model, const Triangulation& mesh)
      : work_(std::move(shape)), theta_(theta), model_(model), mesh_(mesh) {}

  double value(const Eigen::VectorXd& x) {
    unpack(x, work_);
    return film_energy(work_, theta_, model_, mesh_);
  }

  double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    unpack(x, work_);
    FilmEvaluation ev = evaluate_film(work_, theta_, model_, mesh_, true);
    FilmState grad{std::move(ev.dy), std::move(ev.db)};
    g = pack(grad);
    return ev.terms.total;
  }

 private:
  FilmState work_;
  const ScalarP0& theta_;
  const EnergyModel& model_;
  const Triangulation& mesh_;
};

/// Coordinate mask for a nodal constraint mask (b is never constrained).
inline std::vector<char> coordinate_mask(const std::vector<char>& node_mask, const Triangulation& mesh) {
  std::vector<char> m(3 * (mesh.num_nodes() + mesh.num_elements()), 0);
  for (std::size_t i = 0; i < node_mask.size(); ++i) {
    if (node_mask[i]) m[3 * i] = m[3 * i + 1] = m[3 * i + 2] = 1;
  }
  return m;
}

struct MinimizeResult {
  FilmState state;
  MinimizeReport report;
};

/// Local minimizer of the film energy over the free (y, b) unknowns.
/// `node_mask[i] != 0` pins node i at its initial value.
inline MinimizeResult minimize(const FilmState& initial, const ScalarP0& theta, const EnergyModel& model,
                               const Triangulation& mesh, const std::vector<char>& node_mask,
                               const MinimizeOptions& opts, const IterationLog& log = {}) {
  check_state(initial, mesh);
  if (node_mask.size() != mesh.num_nodes()) throw InvalidInput("minimize: node mask size mismatch");
  model.validate();
  FilmObjective obj(initial, theta, model, mesh);
  Eigen::VectorXd x = pack(initial);
  MinimizeResult res;
  res.report = minimize_pr_cg(obj, x, coordinate_mask(node_mask, mesh), opts, log);
  res.state = initial;
  unpack(x, res.state);
  return res;
}

}  // namespace marten
