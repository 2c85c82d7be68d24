#pragma once

#include "marten/energy.hpp"
#include "marten/mesh.hpp"
#include "marten/minimizer.hpp"
#include "marten/types.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace marten {

// ---------------------------------------------------------------------------
// Phases
// ---------------------------------------------------------------------------

struct PhaseLabel {
  int well = WellSet::kAustenite;  ///< kAustenite or the nearest variant
  bool austenite() const { return well == WellSet::kAustenite; }
  friend bool operator==(const PhaseLabel&, const PhaseLabel&) = default;
};

/// Active branch of the energy density at (F, theta), offsets included.
inline PhaseLabel classify_phase(const Matrix3& f, double theta, const EnergyModel& m) {
  return {evaluate_density(f, theta, m).well};
}

struct PhaseFractions {
  double austenite = 0.0;
  std::vector<double> variant;
};

inline PhaseFractions phase_fractions(const FilmState& s, const ScalarP0& theta, const EnergyModel& m,
                                      const Triangulation& mesh) {
  PhaseFractions out;
  out.variant.assign(m.wells.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
    const PhaseLabel p = classify_phase(assemble_F(mesh, s.y, s.b, k), theta.values(static_cast<Eigen::Index>(k)), m);
    const double a = mesh.area(k);
    total += a;
    if (p.austenite()) {
      out.austenite += a;
    } else {
      out.variant[static_cast<std::size_t>(p.well)] += a;
    }
  }
  out.austenite /= total;
  for (double& v : out.variant) v /= total;
  return out;
}

// ---------------------------------------------------------------------------
// Nucleation
// ---------------------------------------------------------------------------

/// Logistic equilibrium distribution P(theta) = 1 / (1 + exp(-(theta - center) / width)).
struct Logistic {
  double center = 1.0;
  double width = 0.05;

  double operator()(double theta) const { return 1.0 / (1.0 + std::exp(-(theta - center) / width)); }
};

struct NucleationPolicy {
  bool enabled = true;
  Logistic heating;                ///< used for every element unless `cooling` is set
  std::optional<Logistic> cooling; ///< used where the temperature decreases
  std::uint64_t seed = 20020820;
  bool prohibit_austenite_to_martensite_on_heating = false;
  bool prohibit_martensite_to_austenite_on_cooling = false;

  void validate() const {
    if (!(heating.width > 0.0)) throw InvalidInput("nucleation width must be positive");
    if (cooling && !(cooling->width > 0.0)) throw InvalidInput("cooling nucleation width must be positive");
  }
};

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// sigma(K, step) in (0, 1), a pure function of (seed, element, step).
inline double nucleation_draw(std::uint64_t seed, std::uint64_t element, std::uint64_t step) {
  std::uint64_t z = mix64(seed + 0x9e3779b97f4a7c15ULL);
  z = mix64(z ^ (element * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
  z = mix64(z ^ (step * 0xaef17502108ef2d9ULL + 0x632be59bd9b4e019ULL));
  return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

enum class NucleationCase : int {
  keep_austenite = 1,
  to_austenite = 2,
  to_martensite = 3,
  keep_martensite = 4,
};

struct NucleationResult {
  FilmState state;
  std::vector<NucleationCase> cases;
  std::vector<char> transformed;  ///< b was rewritten on this element
  int degenerate = 0;             ///< elements skipped for a vanishing normal
};

/// Seeds the initial iterate of a time step. y is carried over unchanged; on
/// elements selected for transformation b becomes the unit normal
/// y,1 x y,2 / |y,1 x y,2| (austenite) or gamma times it (martensite).
///
/// `theta_prev` gives the temperature trend used by the cooling distribution
/// and the transformation prohibitions; pass `nullptr` when there is none.
inline NucleationResult nucleate(const FilmState& prev, const ScalarP0& theta_now, const ScalarP0* theta_prev,
                                 const NucleationPolicy& policy, const EnergyModel& m, const Triangulation& mesh,
                                 std::uint64_t step) {
  check_state(prev, mesh);
  policy.validate();
  const std::size_t nk = mesh.num_elements();
  if (static_cast<std::size_t>(theta_now.values.size()) != nk) throw InvalidInput("nucleate: temperature size mismatch");
  if (theta_prev && static_cast<std::size_t>(theta_prev->values.size()) != nk)
    throw InvalidInput("nucleate: previous temperature size mismatch");

  NucleationResult out;
  out.state = prev;
  out.cases.resize(nk);
  out.transformed.assign(nk, 0);
  for (std::size_t k = 0; k < nk; ++k) {
    const Eigen::Index kk = static_cast<Eigen::Index>(k);
    const double theta = theta_now.values(kk);
    const double trend = theta_prev ? theta - theta_prev->values(kk) : 0.0;
    const Matrix32 g = gradient_p1(mesh, prev.y, k);
    Matrix3 f;
    f.leftCols<2>() = g;
    f.col(2) = prev.b.values.col(kk);
    const bool austenite = classify_phase(f, theta, m).austenite();

    double p;
    if (!policy.enabled) {
      p = austenite ? 1.0 : 0.0;
    } else {
      p = (trend < 0.0 && policy.cooling) ? (*policy.cooling)(theta) : policy.heating(theta);
    }
    const double sigma = nucleation_draw(policy.seed, k, step);
    const bool draw_austenite = policy.enabled ? sigma <= p : austenite;
    NucleationCase c;
    if (draw_austenite) {
      c = austenite ? NucleationCase::keep_austenite : NucleationCase::to_austenite;
    } else {
      c = austenite ? NucleationCase::to_martensite : NucleationCase::keep_martensite;
    }
    out.cases[k] = c;

    bool transform = c == NucleationCase::to_austenite || c == NucleationCase::to_martensite;
    if (c == NucleationCase::to_martensite && trend > 0.0 && policy.prohibit_austenite_to_martensite_on_heating) transform = false;
    if (c == NucleationCase::to_austenite && trend < 0.0 && policy.prohibit_martensite_to_austenite_on_cooling) transform = false;
    if (!transform) continue;

    const Vector3 normal = Vector3(g.col(0)).cross(Vector3(g.col(1)));
    const double len = normal.norm();
    if (len < 1e-14) {
      ++out.degenerate;
      std::clog << "warning: element " << k << " has a degenerate normal; keeping its director\n";
      continue;
    }
    const double scale = c == NucleationCase::to_austenite ? 1.0 : m.gamma;
    out.state.b.values.col(kk) = scale * normal / len;
    out.transformed[k] = 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quasi-static evolution
// ---------------------------------------------------------------------------

/// Times t_0 < ... < t_L with an element temperature field at each.
struct Schedule {
  std::vector<double> times;
  std::vector<ScalarP0> theta;

  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }

  void validate(std::size_t n_elements) const {
    if (times.empty()) throw InvalidInput("schedule has no times");
    if (times.size() != theta.size()) throw InvalidInput("schedule times and temperatures differ in length");
    for (std::size_t l = 1; l < times.size(); ++l) {
      if (!(times[l] > times[l - 1])) throw InvalidInput("schedule times must be strictly increasing");
    }
    for (const ScalarP0& t : theta) {
      if (static_cast<std::size_t>(t.values.size()) != n_elements) throw InvalidInput("schedule temperature size mismatch");
    }
  }

  /// Uniform temperature moving linearly through `waypoints`, with
  /// `steps_per_segment` steps of length dt between consecutive waypoints.
  static Schedule ramp(const std::vector<double>& waypoints, int steps_per_segment, double dt, std::size_t n_elements) {
    if (waypoints.size() < 2) throw InvalidInput("ramp needs at least two temperatures");
    if (steps_per_segment < 1) throw InvalidInput("ramp needs at least one step per segment");
    if (!(dt > 0.0)) throw InvalidInput("ramp time step must be positive");
    Schedule s;
    auto push = [&](double th) {
      s.times.push_back(dt * static_cast<double>(s.times.size()));
      s.theta.push_back(ScalarP0::constant(n_elements, th));
    };
    push(waypoints.front());
    for (std::size_t w = 1; w < waypoints.size(); ++w) {
      for (int q = 1; q <= steps_per_segment; ++q) {
        push(waypoints[w - 1] + (waypoints[w] - waypoints[w - 1]) * q / steps_per_segment);
      }
    }
    return s;
  }
};

struct StepRecord {
  int step = 0;
  double time = 0.0;
  double theta_mean = 0.0;
  FilmState state;
  MinimizeReport report;
  double nucleated_energy = 0.0;  ///< energy of the seeded initial iterate
  PhaseFractions fractions;
  std::array<int, 4> case_counts{};
  int transformed = 0;
};

using StepObserver = std::function<void(const StepRecord&)>;

/// Runs nucleate + minimize at every scheduled time after t_0. The initial
/// state is recorded as step 0 without minimization. Steps whose minimization
/// does not converge are recorded with `report.converged == false`.
inline std::vector<StepRecord> evolve(const FilmState& initial, const Schedule& schedule, const NucleationPolicy& policy,
                                      const EnergyModel& m, const Triangulation& mesh, const std::vector<char>& node_mask,
                                      const MinimizeOptions& opts, const StepObserver& observer = {},
                                      bool keep_states = true) {
  check_state(initial, mesh);
  schedule.validate(mesh.num_elements());
  policy.validate();
  std::vector<StepRecord> out;
  FilmState current = initial;

  StepRecord r0;
  r0.time = schedule.times[0];
  r0.theta_mean = schedule.theta[0].values.mean();
  r0.report.energy = film_energy(current, schedule.theta[0], m, mesh);
  r0.report.converged = true;
  r0.report.energy_history = {r0.report.energy};
  r0.nucleated_energy = r0.report.energy;
  r0.fractions = phase_fractions(current, schedule.theta[0], m, mesh);
  r0.state = current;
  if (observer) observer(r0);
  if (!keep_states) r0.state = {};
  out.push_back(std::move(r0));

  for (std::size_t l = 1; l < schedule.times.size(); ++l) {
    const ScalarP0& theta = schedule.theta[l];
    NucleationResult nuc = nucleate(current, theta, &schedule.theta[l - 1], policy, m, mesh, l);
    StepRecord rec;
    rec.step = static_cast<int>(l);
    rec.time = schedule.times[l];
    rec.theta_mean = theta.values.mean();
    for (NucleationCase c : nuc.cases) ++rec.case_counts[static_cast<int>(c) - 1];
    for (char t : nuc.transformed) rec.transformed += t;
    rec.nucleated_energy = film_energy(nuc.state, theta, m, mesh);
    MinimizeResult res = minimize(nuc.state, theta, m, mesh, node_mask, opts);
    rec.report = std::move(res.report);
    current = std::move(res.state);
    rec.fractions = phase_fractions(current, theta, m, mesh);
    rec.state = current;
    if (observer) observer(rec);
    if (!keep_states) rec.state = {};
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace marten
