#include "detlab/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "detlab/io.hpp"

namespace detlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  if (value == "inf") return std::numeric_limits<double>::infinity();
  double x = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), x);
  if (value.empty() || res.ec != std::errc() || res.ptr != value.data() + value.size() || std::isnan(x)) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
  return x;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t x = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), x);
  if (value.empty() || res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
  return x;
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  if (value.empty()) return out;
  std::istringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, trim(item)));
  return out;
}

std::string parse_word(const std::string& key, const std::string& value, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (value == a) return value;
  }
  std::string msg = "key '" + key + "': '" + value + "' is not one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw ConfigError(msg);
}

std::string fmt(double x) { return io::format_double(x); }

std::string fmt_list(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += fmt(xs[i]);
  }
  return s;
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::optional<std::string>(const RunConfig&)> get;
};

#define REAL(name, member)                                                            \
  Field {                                                                             \
    name, [](RunConfig& c, const std::string& v) { c.member = parse_real(name, v); }, \
        [](const RunConfig& c) -> std::optional<std::string> { return fmt(c.member); } \
  }
#define COUNT(name, member)                                                                         \
  Field {                                                                                           \
    name,                                                                                           \
        [](RunConfig& c, const std::string& v) {                                                    \
          c.member = static_cast<decltype(c.member)>(parse_unsigned(name, v));                      \
        },                                                                                          \
        [](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.member); } \
  }
#define OPTIONAL_REAL(name, member)                                                      \
  Field {                                                                                \
    name, [](RunConfig& c, const std::string& v) { c.member = parse_real(name, v); },    \
        [](const RunConfig& c) -> std::optional<std::string> {                           \
          if (!c.member) return std::nullopt;                                            \
          return fmt(*c.member);                                                         \
        }                                                                                \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"model",
            [](RunConfig& c, const std::string& v) { c.model = parse_word("model", v, {"soft", "abr", "hardwall"}); },
            [](const RunConfig& c) -> std::optional<std::string> {
              if (c.model.empty()) return std::nullopt;
              return c.model;
            }},
      REAL("hbar", constants.hbar),
      REAL("mass", constants.mass),
      OPTIONAL_REAL("v", v),
      OPTIONAL_REAL("L", L),
      Field{"wall",
            [](RunConfig& c, const std::string& v) {
              c.wall = parse_word("wall", v, {"neumann", "robin", "dirichlet"});
            },
            [](const RunConfig& c) -> std::optional<std::string> { return c.wall; }},
      REAL("alpha", alpha),
      OPTIONAL_REAL("kappa", kappa),
      REAL("nu", nu),
      REAL("x_min", x_min),
      REAL("dx", dx),
      REAL("dt", dt),
      REAL("t_end", t_end),
      Field{"origin_weight",
            [](RunConfig& c, const std::string& v) {
              c.origin_weight = parse_word("origin_weight", v, {"cell_average", "full"});
            },
            [](const RunConfig& c) -> std::optional<std::string> { return c.origin_weight; }},
      Field{"density_times",
            [](RunConfig& c, const std::string& v) { c.density_times = parse_list("density_times", v); },
            [](const RunConfig& c) -> std::optional<std::string> { return fmt_list(c.density_times); }},
      REAL("packet.x0", packet.x0),
      REAL("packet.sigma", packet.sigma),
      REAL("packet.k0", packet.k0),
      REAL("k_min", k_min),
      REAL("k_max", k_max),
      COUNT("k_count", k_count),
      REAL("ell", ell),
      REAL("window.re_min", window.re_min),
      REAL("window.re_max", window.re_max),
      REAL("window.im_min", window.im_min),
      REAL("window.im_max", window.im_max),
      COUNT("window.seeds_re", window.seeds_re),
      COUNT("window.seeds_im", window.seeds_im),
      REAL("window.tolerance", window.tolerance),
      COUNT("window.max_iterations", window.max_iterations),
      Field{"sweep",
            [](RunConfig& c, const std::string& v) {
              c.sweep = parse_word("sweep", v, {"ck", "fII", "allcock", "rhoT", "spectrum"});
            },
            [](const RunConfig& c) -> std::optional<std::string> { return c.sweep; }},
      REAL("sweep.k", sweep_k),
      REAL("sweep.v0", sweep_v0),
      REAL("sweep.ratio", sweep_ratio),
      COUNT("sweep.count", sweep_count),
      COUNT("bohm.n", bohm_n),
      COUNT("bohm.snapshot_every", bohm_snapshot_every),
      COUNT("bohm.substeps", bohm_substeps),
      COUNT("bohm.bins", bohm_bins),
      COUNT("seed", seed),
      Field{"out", [](RunConfig& c, const std::string& v) { c.out = v; },
            [](const RunConfig& c) -> std::optional<std::string> {
              if (c.out.empty()) return std::nullopt;
              return c.out;
            }},
  };
  return table;
}

#undef REAL
#undef COUNT
#undef OPTIONAL_REAL

void assign(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("key '" + key + "': " + what);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::istringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    assign(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  assign(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) {
    if (auto v = f.get(config)) out.emplace_back(f.key, *v);
  }
  return out;
}

std::string serialize_config(const RunConfig& config) {
  std::string text;
  for (const auto& [key, value] : config_entries(config)) text += key + " = " + value + "\n";
  return text;
}

WallCondition RunConfig::wall_condition() const {
  if (wall == "robin") return Robin{alpha};
  if (wall == "dirichlet") return Dirichlet{};
  return Neumann{};
}

OriginWeight RunConfig::origin() const {
  return origin_weight == "full" ? OriginWeight::Full : OriginWeight::CellAverage;
}

DetectorSpec RunConfig::detector() const {
  DetectorSpec spec;
  if (model.empty()) {
    throw ConfigError("missing required key 'model'");
  } else if (model == "soft") {
    if (!v) throw ConfigError("missing required key 'v' for model soft");
    if (!L) throw ConfigError("missing required key 'L' for model soft");
    spec = ImaginaryPotential{*v, *L, wall_condition()};
  } else if (model == "abr") {
    if (!kappa) throw ConfigError("missing required key 'kappa' for model abr");
    spec = AbsorbingBoundary{*kappa, nu};
  } else {
    spec = HardWall{};
  }
  try {
    detlab::validate(spec);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid model: ") + e.what());
  }
  return spec;
}

HardLimitSequence RunConfig::hard_sequence() const {
  if (!kappa) throw ConfigError("missing required key 'kappa' for a hard-limit sweep");
  try {
    return make_hard_sequence(*kappa, sweep_v0, sweep_ratio, sweep_count, constants);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid sweep: ") + e.what());
  }
}

void RunConfig::validate() const {
  try {
    constants.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid constants: ") + e.what());
  }
  require(std::isfinite(alpha), "alpha", "must be finite");
  require(std::isfinite(nu), "nu", "must be finite");
  require(std::isfinite(x_min) && x_min < 0.0, "x_min", "must be negative");
  require(std::isfinite(dx) && dx > 0.0, "dx", "must be positive");
  require(std::isfinite(dt) && dt >= 0.0, "dt", "must be >= 0 (0 selects the default)");
  require(std::isfinite(t_end) && t_end > 0.0, "t_end", "must be positive");
  for (double t : density_times) require(std::isfinite(t) && t >= 0.0, "density_times", "must be >= 0");
  require(std::isfinite(packet.sigma) && packet.sigma > 0.0, "packet.sigma", "must be positive");
  require(std::isfinite(packet.x0), "packet.x0", "must be finite");
  require(std::isfinite(packet.k0), "packet.k0", "must be finite");
  require(k_min > 0.0 && std::isfinite(k_min), "k_min", "must be positive");
  require(k_max > k_min && std::isfinite(k_max), "k_max", "must exceed k_min");
  require(k_count >= 2, "k_count", "must be >= 2");
  require(ell > 0.0 && std::isfinite(ell), "ell", "must be positive");
  require(window.re_max > window.re_min, "window.re_max", "must exceed window.re_min");
  require(window.im_max > window.im_min, "window.im_max", "must exceed window.im_min");
  require(window.seeds_re >= 1, "window.seeds_re", "must be >= 1");
  require(window.seeds_im >= 1, "window.seeds_im", "must be >= 1");
  require(window.tolerance > 0.0, "window.tolerance", "must be positive");
  require(window.max_iterations >= 1, "window.max_iterations", "must be >= 1");
  require(sweep_k > 0.0 && std::isfinite(sweep_k), "sweep.k", "must be positive");
  require(sweep_v0 > 0.0 && std::isfinite(sweep_v0), "sweep.v0", "must be positive");
  require(sweep_ratio > 1.0 && std::isfinite(sweep_ratio), "sweep.ratio", "must exceed 1");
  require(sweep_count >= 2, "sweep.count", "must be >= 2");
  require(bohm_n >= 1, "bohm.n", "must be >= 1");
  require(bohm_snapshot_every >= 1, "bohm.snapshot_every", "must be >= 1");
  require(bohm_substeps >= 1, "bohm.substeps", "must be >= 1");
  require(bohm_bins >= 1, "bohm.bins", "must be >= 1");
  if (!model.empty()) (void)detector();
}

}  // namespace detlab
