// Flat key = value run configuration shared by all command-line tools.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "detlab/core.hpp"
#include "detlab/eigen.hpp"
#include "detlab/evolve.hpp"
#include "detlab/limits.hpp"

namespace detlab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // model
  std::string model;  // soft | abr | hardwall
  PhysicalConstants constants;
  std::optional<double> v;
  std::optional<double> L;  // "inf" for no wall
  std::string wall = "neumann";  // neumann | robin | dirichlet
  double alpha = 0.0;
  std::optional<double> kappa;
  double nu = 0.0;

  // numerics
  double x_min = -30.0;
  double dx = 0.005;
  double dt = 0.0;  // 0: default rule
  double t_end = 16.0;
  std::string origin_weight = "cell_average";  // cell_average | full
  std::vector<double> density_times;

  GaussianPacketSpec packet;

  // eigen table
  double k_min = 0.1;
  double k_max = 5.0;
  std::size_t k_count = 50;

  // finite-interval spectrum
  double ell = 3.141592653589793;
  SearchWindow window;

  // sweeps
  std::string sweep = "ck";  // ck | fII | allcock | rhoT | spectrum
  double sweep_k = 1.0;
  double sweep_v0 = 10.0;
  double sweep_ratio = 10.0;
  std::size_t sweep_count = 6;

  // Bohmian Monte Carlo
  std::size_t bohm_n = 10000;
  std::size_t bohm_snapshot_every = 2;
  std::size_t bohm_substeps = 4;
  std::size_t bohm_bins = 64;

  std::uint64_t seed = 1;
  std::string out;

  /// Checks every field, then builds and validates the detector.
  void validate() const;
  /// The detector described by the model keys; names the missing key on error.
  [[nodiscard]] DetectorSpec detector() const;
  [[nodiscard]] WallCondition wall_condition() const;
  [[nodiscard]] OriginWeight origin() const;
  [[nodiscard]] HardLimitSequence hard_sequence() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys and
/// malformed values throw ConfigError. The result is not validated.
[[nodiscard]] RunConfig parse_config(const std::string& text);

/// Applies one `key=value` assignment on top of `config`.
void apply_override(RunConfig& config, const std::string& assignment);

/// Canonical text form: every key, one per line, in a fixed order. Optional
/// keys that are unset are omitted.
[[nodiscard]] std::string serialize_config(const RunConfig& config);

/// Key/value pairs of the canonical form, for embedding into manifests.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);

}  // namespace detlab
