#pragma once

// Sectioned key/value run configuration.
//
//   # comment            ; comment
//   [section]
//   key = value
//
// Lists are separated by commas or whitespace. Variant indices are 1-based
// here and 0-based in the library API. Every key has a default, and unknown
// sections or keys are rejected with their line number.

#include "marten/analysis.hpp"
#include "marten/crystallography.hpp"
#include "marten/evolution.hpp"
#include "marten/io/csv.hpp"
#include "marten/minimizer.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <functional>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace marten::io {

class ConfigError : public InvalidInput {
 public:
  explicit ConfigError(const std::string& what) : InvalidInput(what) {}
};

struct MaterialConfig {
  Matrix3 u1 = Vector3(1.15, 0.9, 0.9).asDiagonal();
  Symmetry point_group = Symmetry::cubic;
  bool austenite = true;
  double mu_a = 1.0;
  double mu_m = 1.0;
  double theta_T = 1.0;
  double c_L = 1.0;
  double kappa = 1e-3;
  double eps_reg = 1e-4;
  double gamma = 0.9;
  Vector3 b0 = Vector3::UnitZ();
};

struct MeshConfig {
  int nx = 16;
  int ny = 16;
  Rectangle domain{};
  std::string file;  ///< plain-text mesh; overrides nx, ny, domain when set
};

enum class BoundaryKind { laminate, affine };
enum class InitialKind { bands, boundary, variant };

struct BoundaryConfig {
  BoundaryKind kind = BoundaryKind::laminate;
  int i = 1;
  int j = 2;
  int twin = 1;
  double lambda = 0.5;
  Matrix3 affine = Matrix3::Identity();
};

struct InitialConfig {
  InitialKind kind = InitialKind::bands;
  double band_scale = 1.0;  ///< band period = band_scale * sqrt(h)
  double offset = 0.0;
  int variant = 1;
  bool relax = true;  ///< evolve: minimize at the first scheduled temperature
};

struct ScheduleConfig {
  std::vector<double> temperatures{0.5, 1.5};
  int steps = 20;  ///< per segment between consecutive temperatures
  double dt = 1.0;
  std::string table;  ///< per-element temperature table; overrides the ramp
};

struct NucleationConfig {
  bool enabled = true;
  double center = 1.0;
  double width = 0.05;
  std::uint64_t seed = 20020820;
  bool cooling = false;
  double cooling_center = 1.0;
  double cooling_width = 0.05;
  bool prohibit_austenite_to_martensite_on_heating = false;
  bool prohibit_martensite_to_austenite_on_cooling = false;
};

struct StudyConfig {
  std::vector<int> levels{8, 16, 32, 64};
  double band_scale = 1.0;
  Rectangle subdomain{0.25, 0.25, 0.75, 0.75};
  double rho = 0.1;
  std::optional<Vector3> w;
  std::vector<std::string> functionals{"F11", "frob2", "trace"};
};

struct OutputConfig {
  std::string dir = "out";
  bool vtk = true;
  int every = 1;
  bool log = true;
};

struct RunConfig {
  MaterialConfig material;
  MeshConfig mesh;
  BoundaryConfig boundary;
  InitialConfig initial;
  double theta = 0.5;  ///< [run] temperature for minimize and study
  MinimizeOptions minimizer;
  ScheduleConfig schedule;
  NucleationConfig nucleation;
  StudyConfig study;
  OutputConfig output;
  std::filesystem::path base_dir;  ///< directory relative paths resolve against

  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  }
};

// ---------------------------------------------------------------------------
// Value codecs
// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  // from_chars for doubles is available in libstdc++ 11
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
    throw std::invalid_argument("expected a finite number, got '" + std::string(s) + "'");
  return v;
}

inline long long parse_integer(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw std::invalid_argument("expected an integer, got '" + std::string(s) + "'");
  return v;
}

inline int parse_int(std::string_view s) {
  const long long v = parse_integer(s);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw std::invalid_argument("integer out of range");
  return static_cast<int>(v);
}

inline std::uint64_t parse_u64(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw std::invalid_argument("expected a non-negative integer, got '" + std::string(s) + "'");
  return v;
}

inline bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + std::string(s) + "'");
}

inline std::vector<double> parse_doubles(std::string_view s, std::size_t min_n = 0, std::size_t max_n = SIZE_MAX) {
  std::vector<double> out;
  for (const std::string& t : split_list(s)) out.push_back(parse_double(t));
  if (out.size() < min_n || out.size() > max_n) {
    throw std::invalid_argument("expected " + (min_n == max_n ? std::to_string(min_n) : "at least " + std::to_string(min_n)) +
                                " numbers, got " + std::to_string(out.size()));
  }
  return out;
}

inline Vector3 parse_vec3(std::string_view s) {
  const auto v = parse_doubles(s, 3, 3);
  return {v[0], v[1], v[2]};
}

/// Three values give a diagonal matrix, nine a row-major one.
inline Matrix3 parse_matrix(std::string_view s) {
  const auto v = parse_doubles(s, 3, 9);
  if (v.size() == 3) return Vector3(v[0], v[1], v[2]).asDiagonal();
  if (v.size() != 9) throw std::invalid_argument("expected 3 diagonal or 9 row-major entries");
  Matrix3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = v[3 * r + c];
  return m;
}

inline Rectangle parse_rectangle(std::string_view s) {
  const auto v = parse_doubles(s, 4, 4);
  return {v[0], v[1], v[2], v[3]};
}

inline std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

inline std::string fmt(double v) { return format_double(v); }
inline std::string fmt(bool v) { return v ? "true" : "false"; }
inline std::string fmt(const Vector3& v) { return join({fmt(v(0)), fmt(v(1)), fmt(v(2))}); }
inline std::string fmt(const Rectangle& r) { return join({fmt(r.x0), fmt(r.y0), fmt(r.x1), fmt(r.y1)}); }
inline std::string fmt(const std::vector<double>& v) {
  std::vector<std::string> s;
  for (double d : v) s.push_back(fmt(d));
  return join(s);
}
inline std::string fmt_matrix(const Matrix3& m) {
  if (m.isDiagonal(0.0)) return fmt(Vector3(m.diagonal()));
  std::vector<std::string> s;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) s.push_back(fmt(m(r, c)));
  return join(s);
}

struct Binding {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, std::string_view)> parse;
  std::function<std::string(const RunConfig&)> format;
};

#define MARTEN_DOUBLE(sec, key, field)                                                      \
  Binding{sec, key, [](RunConfig& c, std::string_view v) { c.field = parse_double(v); }, \
          [](const RunConfig& c) { return fmt(c.field); }}
#define MARTEN_INT(sec, key, field)                                                      \
  Binding{sec, key, [](RunConfig& c, std::string_view v) { c.field = parse_int(v); }, \
          [](const RunConfig& c) { return std::to_string(c.field); }}
#define MARTEN_BOOL(sec, key, field)                                                      \
  Binding{sec, key, [](RunConfig& c, std::string_view v) { c.field = parse_bool(v); }, \
          [](const RunConfig& c) { return fmt(c.field); }}
#define MARTEN_STRING(sec, key, field)                                                          \
  Binding{sec, key, [](RunConfig& c, std::string_view v) { c.field = std::string(trim(v)); }, \
          [](const RunConfig& c) { return c.field; }}

inline const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = {
      Binding{"material", "u1", [](RunConfig& c, std::string_view v) { c.material.u1 = parse_matrix(v); },
              [](const RunConfig& c) { return fmt_matrix(c.material.u1); }},
      Binding{"material", "point_group",
              [](RunConfig& c, std::string_view v) { c.material.point_group = symmetry_from_string(trim(v)); },
              [](const RunConfig& c) { return std::string(to_string(c.material.point_group)); }},
      MARTEN_BOOL("material", "austenite", material.austenite),
      MARTEN_DOUBLE("material", "mu_a", material.mu_a),
      MARTEN_DOUBLE("material", "mu_m", material.mu_m),
      MARTEN_DOUBLE("material", "theta_T", material.theta_T),
      MARTEN_DOUBLE("material", "c_L", material.c_L),
      MARTEN_DOUBLE("material", "kappa", material.kappa),
      MARTEN_DOUBLE("material", "eps_reg", material.eps_reg),
      MARTEN_DOUBLE("material", "gamma", material.gamma),
      Binding{"material", "b0", [](RunConfig& c, std::string_view v) { c.material.b0 = parse_vec3(v); },
              [](const RunConfig& c) { return fmt(c.material.b0); }},

      MARTEN_INT("mesh", "nx", mesh.nx),
      MARTEN_INT("mesh", "ny", mesh.ny),
      Binding{"mesh", "domain", [](RunConfig& c, std::string_view v) { c.mesh.domain = parse_rectangle(v); },
              [](const RunConfig& c) { return fmt(c.mesh.domain); }},
      MARTEN_STRING("mesh", "file", mesh.file),

      Binding{"boundary", "kind",
              [](RunConfig& c, std::string_view v) {
                v = trim(v);
                if (v == "laminate") c.boundary.kind = BoundaryKind::laminate;
                else if (v == "affine") c.boundary.kind = BoundaryKind::affine;
                else throw std::invalid_argument("expected laminate or affine, got '" + std::string(v) + "'");
              },
              [](const RunConfig& c) { return std::string(c.boundary.kind == BoundaryKind::laminate ? "laminate" : "affine"); }},
      MARTEN_INT("boundary", "i", boundary.i),
      MARTEN_INT("boundary", "j", boundary.j),
      MARTEN_INT("boundary", "twin", boundary.twin),
      MARTEN_DOUBLE("boundary", "lambda", boundary.lambda),
      Binding{"boundary", "affine", [](RunConfig& c, std::string_view v) { c.boundary.affine = parse_matrix(v); },
              [](const RunConfig& c) { return fmt_matrix(c.boundary.affine); }},

      Binding{"initial", "kind",
              [](RunConfig& c, std::string_view v) {
                v = trim(v);
                if (v == "bands") c.initial.kind = InitialKind::bands;
                else if (v == "boundary") c.initial.kind = InitialKind::boundary;
                else if (v == "variant") c.initial.kind = InitialKind::variant;
                else throw std::invalid_argument("expected bands, boundary or variant, got '" + std::string(v) + "'");
              },
              [](const RunConfig& c) {
                switch (c.initial.kind) {
                  case InitialKind::bands: return std::string("bands");
                  case InitialKind::boundary: return std::string("boundary");
                  default: return std::string("variant");
                }
              }},
      MARTEN_DOUBLE("initial", "band_scale", initial.band_scale),
      MARTEN_DOUBLE("initial", "offset", initial.offset),
      MARTEN_INT("initial", "variant", initial.variant),
      MARTEN_BOOL("initial", "relax", initial.relax),

      MARTEN_DOUBLE("run", "theta", theta),

      MARTEN_DOUBLE("minimizer", "grad_tol", minimizer.grad_tol),
      MARTEN_INT("minimizer", "max_iters", minimizer.max_iters),
      MARTEN_INT("minimizer", "restart_period", minimizer.restart_period),
      MARTEN_DOUBLE("minimizer", "initial_step", minimizer.line_search.initial_step),
      MARTEN_DOUBLE("minimizer", "contraction", minimizer.line_search.contraction),
      MARTEN_DOUBLE("minimizer", "armijo", minimizer.line_search.armijo),
      MARTEN_INT("minimizer", "max_backtracks", minimizer.line_search.max_backtracks),

      Binding{"schedule", "temperatures",
              [](RunConfig& c, std::string_view v) { c.schedule.temperatures = parse_doubles(v, 2); },
              [](const RunConfig& c) { return fmt(c.schedule.temperatures); }},
      MARTEN_INT("schedule", "steps", schedule.steps),
      MARTEN_DOUBLE("schedule", "dt", schedule.dt),
      MARTEN_STRING("schedule", "table", schedule.table),

      MARTEN_BOOL("nucleation", "enabled", nucleation.enabled),
      MARTEN_DOUBLE("nucleation", "center", nucleation.center),
      MARTEN_DOUBLE("nucleation", "width", nucleation.width),
      Binding{"nucleation", "seed", [](RunConfig& c, std::string_view v) { c.nucleation.seed = parse_u64(v); },
              [](const RunConfig& c) { return std::to_string(c.nucleation.seed); }},
      MARTEN_BOOL("nucleation", "cooling", nucleation.cooling),
      MARTEN_DOUBLE("nucleation", "cooling_center", nucleation.cooling_center),
      MARTEN_DOUBLE("nucleation", "cooling_width", nucleation.cooling_width),
      MARTEN_BOOL("nucleation", "prohibit_austenite_to_martensite_on_heating",
                  nucleation.prohibit_austenite_to_martensite_on_heating),
      MARTEN_BOOL("nucleation", "prohibit_martensite_to_austenite_on_cooling",
                  nucleation.prohibit_martensite_to_austenite_on_cooling),

      Binding{"study", "levels",
              [](RunConfig& c, std::string_view v) {
                c.study.levels.clear();
                for (const std::string& t : split_list(v)) c.study.levels.push_back(parse_int(t));
              },
              [](const RunConfig& c) {
                std::vector<std::string> s;
                for (int l : c.study.levels) s.push_back(std::to_string(l));
                return join(s);
              }},
      MARTEN_DOUBLE("study", "band_scale", study.band_scale),
      Binding{"study", "subdomain", [](RunConfig& c, std::string_view v) { c.study.subdomain = parse_rectangle(v); },
              [](const RunConfig& c) { return fmt(c.study.subdomain); }},
      MARTEN_DOUBLE("study", "rho", study.rho),
      Binding{"study", "w",
              [](RunConfig& c, std::string_view v) {
                if (trim(v) == "auto") c.study.w.reset();
                else c.study.w = parse_vec3(v);
              },
              [](const RunConfig& c) { return c.study.w ? fmt(*c.study.w) : std::string("auto"); }},
      Binding{"study", "functionals", [](RunConfig& c, std::string_view v) { c.study.functionals = split_list(v); },
              [](const RunConfig& c) { return join(c.study.functionals); }},

      MARTEN_STRING("output", "dir", output.dir),
      MARTEN_BOOL("output", "vtk", output.vtk),
      MARTEN_INT("output", "every", output.every),
      MARTEN_BOOL("output", "log", output.log),
  };
  return table;
}

#undef MARTEN_DOUBLE
#undef MARTEN_INT
#undef MARTEN_BOOL
#undef MARTEN_STRING

}  // namespace detail

// ---------------------------------------------------------------------------
// Derived objects and validation
// ---------------------------------------------------------------------------

inline WellSet build_wells(const RunConfig& c) {
  if (!is_spd(c.material.u1)) throw ConfigError("material.u1: must be symmetric positive definite");
  WellSet w = generate_variants(c.material.u1, PointGroup::make(c.material.point_group));
  w.includes_austenite = c.material.austenite;
  return w;
}

inline EnergyModel build_model(const RunConfig& c) {
  EnergyModel m;
  m.wells = build_wells(c);
  m.mu_a = c.material.mu_a;
  m.mu_m = c.material.mu_m;
  m.theta_T = c.material.theta_T;
  m.c_L = c.material.c_L;
  m.kappa = c.material.kappa;
  m.eps_reg = c.material.eps_reg;
  m.gamma = c.material.gamma;
  m.b0 = c.material.b0;
  m.validate();
  return m;
}

inline LaminateSpec build_laminate(const RunConfig& c, const WellSet& wells) {
  const int n = static_cast<int>(wells.size());
  const BoundaryConfig& b = c.boundary;
  if (b.i < 1 || b.i > n) throw ConfigError("boundary.i: variant " + std::to_string(b.i) + " out of range 1.." + std::to_string(n));
  if (b.j < 1 || b.j > n) throw ConfigError("boundary.j: variant " + std::to_string(b.j) + " out of range 1.." + std::to_string(n));
  if (b.i == b.j) throw ConfigError("boundary.j: must differ from boundary.i");
  if (b.twin != 1 && b.twin != 2) throw ConfigError("boundary.twin: must be 1 or 2");
  if (!(b.lambda >= 0.0 && b.lambda <= 1.0)) throw ConfigError("boundary.lambda: must lie in [0, 1]");
  const std::vector<TwinSolution> twins = solve_twin(wells.variants[b.i - 1], wells.variants[b.j - 1]);
  if (twins.empty())
    throw ConfigError("boundary: variants " + std::to_string(b.i) + " and " + std::to_string(b.j) + " are not twin related");
  if (static_cast<std::size_t>(b.twin) > twins.size())
    throw ConfigError("boundary.twin: only " + std::to_string(twins.size()) + " twin solution(s) exist");
  return make_laminate(wells, b.i - 1, b.j - 1, twins[static_cast<std::size_t>(b.twin - 1)], b.lambda);
}

/// Semantic checks that need no files: index ranges, signs, list shapes.
inline void validate(const RunConfig& c) {
  const WellSet wells = build_wells(c);
  try {
    build_model(c);
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("material: ") + e.what());
  }
  if (c.mesh.file.empty()) {
    if (c.mesh.nx < 1 || c.mesh.ny < 1) throw ConfigError("mesh.nx, mesh.ny: must be >= 1");
    if (!(c.mesh.domain.x1 > c.mesh.domain.x0 && c.mesh.domain.y1 > c.mesh.domain.y0))
      throw ConfigError("mesh.domain: expected x0, y0, x1, y1 with x1 > x0 and y1 > y0");
  }
  if (c.boundary.kind == BoundaryKind::laminate) build_laminate(c, wells);
  if (c.initial.kind == InitialKind::variant &&
      (c.initial.variant < 1 || c.initial.variant > static_cast<int>(wells.size())))
    throw ConfigError("initial.variant: out of range 1.." + std::to_string(wells.size()));
  if (c.initial.kind == InitialKind::bands && c.boundary.kind != BoundaryKind::laminate)
    throw ConfigError("initial.kind: bands requires boundary.kind = laminate");
  if (!(c.initial.band_scale > 0.0)) throw ConfigError("initial.band_scale: must be positive");
  try {
    c.minimizer.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("minimizer: ") + e.what());
  }
  if (c.schedule.steps < 1) throw ConfigError("schedule.steps: must be >= 1");
  if (!(c.schedule.dt > 0.0)) throw ConfigError("schedule.dt: must be positive");
  if (!(c.nucleation.width > 0.0)) throw ConfigError("nucleation.width: must be positive");
  if (!(c.nucleation.cooling_width > 0.0)) throw ConfigError("nucleation.cooling_width: must be positive");
  for (std::size_t l = 0; l < c.study.levels.size(); ++l) {
    if (c.study.levels[l] < 1) throw ConfigError("study.levels: must be positive");
    if (l && c.study.levels[l] <= c.study.levels[l - 1]) throw ConfigError("study.levels: must be increasing");
  }
  if (!(c.study.band_scale > 0.0)) throw ConfigError("study.band_scale: must be positive");
  if (!(c.study.rho > 0.0)) throw ConfigError("study.rho: must be positive");
  const Rectangle& s = c.study.subdomain;
  if (!(s.x1 > s.x0 && s.y1 > s.y0)) throw ConfigError("study.subdomain: empty rectangle");
  for (const std::string& f : c.study.functionals) {
    try {
      TestFunctional::from_name(f);
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("study.functionals: ") + e.what());
    }
  }
  if (c.output.every < 1) throw ConfigError("output.every: must be >= 1");
  if (c.output.dir.empty()) throw ConfigError("output.dir: must not be empty");
}

// ---------------------------------------------------------------------------
// Parse and serialize
// ---------------------------------------------------------------------------

/// Parses configuration text. Syntax and value errors carry the line number
/// and the key; semantic validation runs afterwards.
inline RunConfig parse_config(std::istream& in, const std::string& source = "config") {
  RunConfig c;
  const auto& table = detail::bindings();
  std::string section;
  std::string line;
  int line_no = 0;
  std::vector<std::string> seen;
  auto where = [&] { return source + ":" + std::to_string(line_no) + ": "; };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = line;
    const auto comment = v.find_first_of("#;");
    if (comment != std::string_view::npos) v = v.substr(0, comment);
    v = detail::trim(v);
    if (v.empty()) continue;
    if (v.front() == '[') {
      if (v.back() != ']') throw ConfigError(where() + "malformed section header");
      section = std::string(detail::trim(v.substr(1, v.size() - 2)));
      const bool known = std::any_of(table.begin(), table.end(), [&](const auto& b) { return section == b.section; });
      if (!known) throw ConfigError(where() + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where() + "expected 'key = value'");
    const std::string key(detail::trim(v.substr(0, eq)));
    const std::string_view value = detail::trim(v.substr(eq + 1));
    if (section.empty()) throw ConfigError(where() + "key '" + key + "' appears before any [section]");
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const auto& b) { return section == b.section && key == b.key; });
    if (it == table.end()) throw ConfigError(where() + "unknown key '" + key + "' in section [" + section + "]");
    const std::string full = section + "." + key;
    if (std::find(seen.begin(), seen.end(), full) != seen.end())
      throw ConfigError(where() + "duplicate key '" + key + "' in section [" + section + "]");
    seen.push_back(full);
    try {
      it->parse(c, value);
    } catch (const std::exception& e) {
      throw ConfigError(where() + "invalid value for '" + full + "': " + e.what());
    }
  }
  validate(c);
  return c;
}

inline RunConfig parse_config_string(const std::string& text, const std::string& source = "config") {
  std::istringstream in(text);
  return parse_config(in, source);
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  RunConfig c = parse_config(in, path.string());
  c.base_dir = path.parent_path();
  return c;
}

/// Writes every key in table order; parsing the result reproduces `c`.
inline std::string serialize_config(const RunConfig& c) {
  std::string out;
  std::string section;
  for (const auto& b : detail::bindings()) {
    if (section != b.section) {
      if (!section.empty()) out += "\n";
      section = b.section;
      out += "[" + section + "]\n";
    }
    out += std::string(b.key) + " = " + b.format(c) + "\n";
  }
  return out;
}

}  // namespace marten::io
