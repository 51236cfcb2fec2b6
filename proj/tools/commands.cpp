#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "detlab/bohm.hpp"
#include "detlab/eigen.hpp"
#include "detlab/evolve.hpp"
#include "detlab/io.hpp"
#include "detlab/limits.hpp"

#ifndef DETLAB_VERSION
#define DETLAB_VERSION "0.0.0"
#endif

namespace detlab::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

template <class Writer, class... Args>
Artifact artifact(std::string name, Writer writer, const Args&... args) {
  std::ostringstream os;
  writer(os, args...);
  return {std::move(name), os.str()};
}

Artifact json_artifact(std::string name, const json& j) { return {std::move(name), j.dump(2) + "\n"}; }

json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

struct Evolution {
  Grid grid;
  double dt;
  std::size_t steps;
  WaveState initial;
  RunResult result;
};

Evolution evolve_packet(const RunConfig& config, const DetectorSpec& model, std::size_t snapshot_every) {
  const double edge = right_edge(model);
  if (!std::isfinite(edge)) {
    throw std::invalid_argument("the soft model needs a finite L to be evolved");
  }
  if (const auto* soft = std::get_if<ImaginaryPotential>(&model); soft && config.dx > soft->L / 4.0 * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "grid cannot resolve the detector: dx = " << config.dx << " > L/4 = " << soft->L / 4.0;
    throw std::invalid_argument(os.str());
  }
  const Grid grid = Grid::anchored(config.x_min, edge, config.dx);
  WaveState psi0 = make_gaussian_packet(grid, config.packet);
  const double dt = config.dt > 0.0 ? config.dt : default_time_step(config.packet.k0, model, config.constants);
  const auto steps = static_cast<std::size_t>(std::llround(config.t_end / dt));
  if (steps < 1) throw std::invalid_argument("t_end is shorter than one time step");

  RunOptions options;
  options.density_times = config.density_times;
  options.snapshot_every = snapshot_every;
  options.origin_weight = config.origin();
  RunResult result = run(psi0, model, dt, steps, config.constants, options);
  return {grid, dt, steps, std::move(psi0), std::move(result)};
}

json run_summary(const Evolution& ev) {
  json s;
  s["dx"] = ev.grid.dx();
  s["nodes"] = ev.grid.size();
  s["x_min"] = ev.grid.x_min();
  s["x_max"] = ev.grid.x_max();
  s["dt"] = ev.dt;
  s["steps"] = ev.steps;
  s["never_detected"] = ev.result.never_detected;
  s["detected"] = 1.0 - ev.result.never_detected;
  s["plateaued"] = ev.result.plateaued;
  s["warnings"] = ev.result.warnings;
  return s;
}

}  // namespace

CommandOutput cmd_eigen(const RunConfig& config) {
  const DetectorSpec model = config.detector();
  std::vector<Eigenmode> modes;
  modes.reserve(config.k_count);
  for (std::size_t i = 0; i < config.k_count; ++i) {
    const double k = config.k_min + (config.k_max - config.k_min) * static_cast<double>(i) /
                                         static_cast<double>(config.k_count - 1);
    if (const auto* soft = std::get_if<ImaginaryPotential>(&model)) {
      modes.push_back(soft_mode(k, soft->v, soft->L, soft->wall, config.constants));
    } else if (const auto* abr = std::get_if<AbsorbingBoundary>(&model)) {
      modes.push_back(hard_mode(k, abr->kappa, abr->nu, config.constants));
    } else {
      modes.push_back(Eigenmode{model, k, std::nullopt, -1.0, 0.0, 0.0, config.constants.energy_of(cplx{k})});
    }
  }
  CommandOutput out;
  out.artifacts.push_back(artifact("eigen.csv", io::write_eigen_table_csv, modes));
  out.summary["model"] = describe(model);
  out.summary["rows"] = modes.size();
  return out;
}

CommandOutput cmd_spectrum(const RunConfig& config) {
  const DetectorSpec model = config.detector();
  const SpectrumResult spectrum = finite_interval_spectrum(config.ell, model, config.window, config.constants);
  CommandOutput out;
  out.artifacts.push_back(artifact("spectrum.csv", io::write_spectrum_csv, spectrum));
  out.summary["model"] = describe(model);
  out.summary["roots"] = spectrum.points.size();
  out.summary["seeds_tried"] = spectrum.seeds_tried;
  out.summary["seeds_failed"] = spectrum.seeds_failed;
  return out;
}

CommandOutput cmd_evolve(const RunConfig& config) {
  const DetectorSpec model = config.detector();
  const Evolution ev = evolve_packet(config, model, 0);
  CommandOutput out;
  out.artifacts.push_back(artifact("timeseries.csv", io::write_timeseries_csv, ev.result.series));
  if (std::holds_alternative<ImaginaryPotential>(model)) {
    out.artifacts.push_back(artifact("density.csv", io::write_density_csv, ev.result.series));
  }
  out.summary = run_summary(ev);
  out.summary["model"] = describe(model);
  return out;
}

CommandOutput cmd_bohm(const RunConfig& config) {
  const DetectorSpec model = config.detector();
  const Evolution ev = evolve_packet(config, model, config.bohm_snapshot_every);
  const auto positions = sample_initial_positions(ev.initial, config.bohm_n, config.seed);
  BohmOptions options;
  options.substeps = config.bohm_substeps;
  const auto outcomes = simulate(model, ev.result.snapshots, positions, config.seed, config.constants, options);

  std::size_t detected = 0, left = 0, reexit = 0, floored = 0;
  for (const auto& o : outcomes) {
    detected += o.detected;
    left += o.left_domain;
    reexit += o.reexited_detector;
    floored += o.hit_density_floor;
  }
  const auto& ts = ev.result.series;
  std::vector<double> cdf(ts.norm_sq.size());
  for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = 1.0 - ts.norm_sq[i];
  const double n = static_cast<double>(outcomes.size());

  CommandOutput out;
  out.artifacts.push_back(artifact("outcomes.csv", io::write_outcomes_csv, outcomes));
  out.artifacts.push_back(artifact("histogram.csv", io::write_histogram_csv,
                                   detection_time_histogram(outcomes, ts.times.back(), config.bohm_bins)));
  out.artifacts.push_back(artifact("timeseries.csv", io::write_timeseries_csv, ts));
  out.summary = run_summary(ev);
  out.summary["model"] = describe(model);
  out.summary["trajectories"] = outcomes.size();
  out.summary["detected_fraction"] = static_cast<double>(detected) / n;
  out.summary["surviving_fraction"] = static_cast<double>(outcomes.size() - detected) / n;
  out.summary["left_domain_fraction"] = static_cast<double>(left) / n;
  out.summary["reexit_fraction"] = static_cast<double>(reexit) / n;
  out.summary["density_floor_fraction"] = static_cast<double>(floored) / n;
  out.summary["ks_distance"] = detection_time_ks(outcomes, ts.times, cdf);
  out.summary["ks_threshold"] = 3.0 / std::sqrt(n);
  return out;
}

CommandOutput cmd_sweep(const RunConfig& config) {
  CommandOutput out;
  ConvergenceReport report;
  if (config.sweep == "allcock") {
    std::vector<double> vs;
    double v = config.sweep_v0;
    for (std::size_t i = 0; i < config.sweep_count; ++i, v *= config.sweep_ratio) vs.push_back(v);
    report = sweep_allcock(config.sweep_k, vs, config.constants);
  } else {
    const HardLimitSequence seq = config.hard_sequence();
    if (config.sweep == "ck") {
      const WallCondition wall = config.wall_condition();
      report = std::holds_alternative<Dirichlet>(wall) ? sweep_ck_dirichlet(config.sweep_k, seq, config.constants)
                                                        : sweep_ck(config.sweep_k, seq, wall, config.constants);
    } else if (config.sweep == "fII") {
      report = sweep_fII(config.sweep_k, seq, config.constants);
    } else if (config.sweep == "spectrum") {
      report = sweep_finite_interval(config.ell, seq, config.window, config.constants);
    } else {
      RhoTNumerics numerics;
      numerics.x_min = config.x_min;
      numerics.dx = config.dx;
      numerics.dt = config.dt;
      numerics.t_end = config.t_end;
      numerics.origin_weight = config.origin();
      RhoTSweep sweep = sweep_rhoT(config.packet, seq, AbsorbingBoundary{*config.kappa, config.nu}, numerics,
                                   config.constants);
      out.artifacts.push_back(artifact("rhoT_abr.csv", io::write_timeseries_csv, sweep.abr));
      for (std::size_t i = 0; i < sweep.soft.size(); ++i) {
        out.artifacts.push_back(
            artifact("rhoT_soft_" + std::to_string(i) + ".csv", io::write_timeseries_csv, sweep.soft[i]));
      }
      out.summary["dx"] = sweep.grid.dx();
      out.summary["dt"] = sweep.dt;
      report = std::move(sweep.report);
    }
  }
  out.artifacts.insert(out.artifacts.begin(), artifact("report.csv", io::write_report_csv, report));
  out.artifacts.insert(out.artifacts.begin(), json_artifact("report.json", io::report_to_json(report)));
  out.summary["sweep"] = report.sweep;
  out.summary["verdict"] = to_string(report.verdict);
  out.summary["limit_reached"] = report.limit_reached;
  out.summary["slope"] = report.slope ? json_number(*report.slope) : json(nullptr);
  return out;
}

fs::path resolve_out_dir(const RunConfig& config) {
  if (!config.out.empty()) return config.out;
  if (const char* env = std::getenv("DETLAB_OUT"); env && *env) return env;
  return "detlab_out";
}

std::string error_record(const std::string& command, const std::string& kind, const std::string& message) {
  json j;
  j["error"] = kind;
  j["command"] = command;
  j["message"] = message;
  return j.dump();
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  f << content;
  if (!f) throw std::ios_base::failure("failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot read " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace

int run_command(const std::string& command, RunConfig config, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  const std::string started_utc = utc_now();
  try {
    config.validate();
    CommandOutput output;
    if (command == "eigen") {
      output = cmd_eigen(config);
    } else if (command == "spectrum") {
      output = cmd_spectrum(config);
    } else if (command == "evolve") {
      output = cmd_evolve(config);
    } else if (command == "bohm") {
      output = cmd_bohm(config);
    } else if (command == "sweep") {
      output = cmd_sweep(config);
    } else {
      err << error_record(command, "usage", "unknown command") << '\n';
      return kUsage;
    }

    const fs::path dir = resolve_out_dir(config);
    config.out = dir.string();
    fs::create_directories(dir);
    json files = json::array();
    for (const auto& a : output.artifacts) {
      write_file(dir / a.name, a.content);
      files.push_back({{"file", a.name}, {"bytes", a.content.size()}, {"fnv1a64", io::fnv1a64_hex(a.content)}});
    }
    json cfg = json::object();
    for (const auto& [k, v] : config_entries(config)) cfg[k] = v;

    json manifest;
    manifest["tool"] = "detlab";
    manifest["version"] = DETLAB_VERSION;
    manifest["command"] = command;
    manifest["config"] = cfg;
    manifest["summary"] = output.summary;
    manifest["outputs"] = files;
    manifest["started_utc"] = started_utc;
    manifest["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return kOk;
  } catch (const ConfigError& e) {
    err << error_record(command, "config", e.what()) << '\n';
    return kConfig;
  } catch (const std::ios_base::failure& e) {
    err << error_record(command, "io", e.what()) << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << error_record(command, "io", e.what()) << '\n';
    return kIo;
  } catch (const ResonanceError& e) {
    err << error_record(command, "resonance", e.what()) << '\n';
    return kNumerical;
  } catch (const SolverError& e) {
    err << error_record(command, "solver", e.what()) << '\n';
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    err << error_record(command, "invalid_argument", e.what()) << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << error_record(command, "runtime", e.what()) << '\n';
    return kNumerical;
  }
}

int verify_manifest(const fs::path& manifest, std::ostream& out, std::ostream& err) {
  try {
    const json m = json::parse(read_file(manifest));
    const fs::path dir = manifest.parent_path();
    bool ok = true;
    for (const auto& entry : m.at("outputs")) {
      const auto name = entry.at("file").get<std::string>();
      const auto expected = entry.at("fnv1a64").get<std::string>();
      const auto actual = io::fnv1a64_hex(read_file(dir / name));
      const bool match = actual == expected;
      ok = ok && match;
      out << (match ? "ok       " : "MISMATCH ") << name << '\n';
    }
    return ok ? kOk : kNumerical;
  } catch (const std::ios_base::failure& e) {
    err << error_record("verify", "io", e.what()) << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << error_record("verify", "manifest", e.what()) << '\n';
    return kConfig;
  }
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"detlab: detector models, evolution, Bohmian trajectories and limit sweeps"};
  app.set_version_flag("--version", DETLAB_VERSION);
  app.require_subcommand(1);

  struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::vector<std::string> sets;
  };
  Common common;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"eigen", "eigenmode table over a k grid"},
      {"spectrum", "complex spectrum of the finite-interval problem"},
      {"evolve", "Crank-Nicolson evolution of a Gaussian packet"},
      {"bohm", "Bohmian Monte Carlo on top of an evolution"},
      {"sweep", "Allcock or hard-limit parameter sweep"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", common.config_path, "key = value config file");
    sub->add_option("--seed", common.seed, "random seed");
    sub->add_option("--out", common.out_dir, "output directory (default: $DETLAB_OUT or ./detlab_out)");
    sub->add_option("--set", common.sets, "override a config key (key=value), repeatable");
  }
  std::string manifest_path;
  auto* verify = app.add_subcommand("verify", "recompute the checksums listed in a manifest");
  verify->add_option("manifest", manifest_path, "path to manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << DETLAB_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << error_record("", "usage", e.what()) << '\n';
    return kUsage;
  }

  if (verify->parsed()) return verify_manifest(manifest_path, out, err);

  const std::string command = app.get_subcommands().front()->get_name();
  RunConfig config;
  try {
    if (!common.config_path.empty()) config = parse_config(read_file(common.config_path));
    for (const auto& s : common.sets) apply_override(config, s);
    if (common.seed) config.seed = *common.seed;
    if (!common.out_dir.empty()) config.out = common.out_dir;
  } catch (const ConfigError& e) {
    err << error_record(command, "config", e.what()) << '\n';
    return kConfig;
  } catch (const std::ios_base::failure& e) {
    err << error_record(command, "io", e.what()) << '\n';
    return kIo;
  }
  return run_command(command, std::move(config), err);
}

}  // namespace detlab::cli
