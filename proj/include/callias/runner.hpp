#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "callias/config.hpp"
#include "callias/flow_eta.hpp"

namespace callias {

extern const char* const kArtifactVersion;

struct RunOptions {
    std::string out_dir;  // empty: use the config's output_dir
    int workers = 1;
};

struct RunOutcome {
    int exit_code = 0;
    std::string message;  // "<Kind>: <detail>" on failure
    std::optional<IndexReport> report;
    std::string out_dir;
};

// Executes the configured tasks, writes reports and the manifest. Never throws for model or
// numerical errors; they are mapped to exit codes.
RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

// Parameter sweep: one sub-run per value under <out>/value_<i>/ plus sweep.csv and a manifest.
RunOutcome run_sweep(const json& doc, const SweepSpec& sweep, const RunOptions& opts);

// CLI entry points; messages go to err.
int run_command(const std::string& config_path, const std::optional<std::string>& out, int workers,
                const std::vector<std::string>& overrides, std::ostream& err);
int sweep_command(const std::string& config_path, const std::string& param, const std::string& values,
                  const std::optional<std::string>& out, int workers, const std::vector<std::string>& overrides,
                  std::ostream& err);

// Writes manifest.json listing every other file under dir with sha256 and size.
void write_manifest(const std::string& dir, const json& extra);

// Initial state for the evolve task on a given grid, unit l2 norm.
cvec wave_packet(const SpatialGrid& grid, const WavePacket& p);

}  // namespace callias
