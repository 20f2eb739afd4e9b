#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "spikereg/harness.hpp"
#include "spikereg/types.hpp"

namespace spikereg {

// Writes one run into dir:
//   trajectories.csv  t, x*, xhat*, u*, z*, p_diag*   (%.17g, round-trips)
//   raster.csv        step, neuron                    (spiking runs only)
//   summary.json      resolved config echo + scalar metrics + conventions
void write_run(const std::filesystem::path& dir, const ExperimentConfig& cfg,
               const RunResult& result);

// Reloads what write_run stored. Metrics and config come from summary.json;
// series come from the CSVs. Bit-exact for the series.
struct StoredRun {
  nlohmann::json summary;
  RunResult result;
};
StoredRun load_run(const std::filesystem::path& dir);

// compare.csv: one row per (state, framework) cell with mean, std, spike %.
void write_compare_csv(const std::filesystem::path& path,
                       const CompareResult& result,
                       const std::vector<std::string>& state_labels);

void write_neuron_sweep_csv(const std::filesystem::path& path,
                            const std::vector<NeuronSweepRow>& rows);

void write_firing_sweep_csv(const std::filesystem::path& path,
                            const std::vector<FiringSweepRow>& rows);

// Derives plot-ready tables from a stored run directory:
//   error.csv   t, e* = x* - xhat*
//   bounds.csv  t, lo*, hi* (3 sigma envelopes around zero error)
//   active.csv  t, pct (spiking runs only)
// Returns the files written.
std::vector<std::filesystem::path> emit_plots(
    const std::filesystem::path& run_dir);

// Shared CSV helpers. Header row + %.17g data rows; loads reject shape or
// header mismatches with config_error.
void write_matrix_csv(const std::filesystem::path& path,
                      const std::vector<std::string>& header, const Mat& data);
Mat load_matrix_csv(const std::filesystem::path& path,
                    std::vector<std::string>* header_out = nullptr);

}  // namespace spikereg
