// Subcommands of the detlab tool. Each command turns a validated RunConfig
// into a set of named artifacts; run_command writes them next to a manifest.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "detlab/config.hpp"

namespace detlab::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,
  kNumerical = 3,
  kIo = 4,
};

struct Artifact {
  std::string name;
  std::string content;
};

struct CommandOutput {
  std::vector<Artifact> artifacts;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

[[nodiscard]] CommandOutput cmd_eigen(const RunConfig& config);
[[nodiscard]] CommandOutput cmd_spectrum(const RunConfig& config);
[[nodiscard]] CommandOutput cmd_evolve(const RunConfig& config);
[[nodiscard]] CommandOutput cmd_bohm(const RunConfig& config);
[[nodiscard]] CommandOutput cmd_sweep(const RunConfig& config);

/// Output directory: config.out, else $DETLAB_OUT, else ./detlab_out.
[[nodiscard]] std::filesystem::path resolve_out_dir(const RunConfig& config);

/// Validates, dispatches, writes artifacts plus manifest.json, and maps
/// failures to an exit code with a one-line JSON record on `err`.
int run_command(const std::string& command, RunConfig config, std::ostream& err);

/// Recomputes the checksums listed in a manifest. Returns kOk when all match.
int verify_manifest(const std::filesystem::path& manifest, std::ostream& out, std::ostream& err);

[[nodiscard]] std::string error_record(const std::string& command, const std::string& kind, const std::string& message);

/// Full command-line entry point.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace detlab::cli
