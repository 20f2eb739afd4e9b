#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikereg/linear_dynamics.hpp"
#include "spikereg/spiking.hpp"
#include "spikereg/types.hpp"

namespace spikereg {

enum class Framework { lqg, lqr_msif, snn_lqr_msif };

std::string to_string(Framework f);
Framework framework_from_string(const std::string& name);

struct SilenceEvent {
  double time = 0.0;
  double fraction = 0.0;  // share of neurons muted at that instant, (0, 1)
};

// Deviations injected between the true plant and the design model.
struct UncertaintySpec {
  double model_scale = 1.0;  // design A = model_scale * true A
  std::vector<double> outlier_times;
  double outlier_scale = 1.0;
  std::vector<SilenceEvent> silence_schedule;
};

struct ExperimentConfig {
  std::string scenario = "workbench";  // "workbench" or "cw"
  Framework framework = Framework::lqg;

  double duration = 0.0;  // seconds; must be an integer multiple of dt
  double dt = 0.0;

  int n_neurons = 0;
  double lambda = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  double delta = 0.0;
  double eta_std = 0.0;
  double decoder_variance = 0.0;
  double target_decoder_variance = 0.0;
  SpikeResolution spike_resolution = SpikeResolution::greedy;

  bool noise = true;       // process + measurement noise
  double p0_scale = 1e-2;  // P(0) = p0_scale * I

  std::vector<std::uint64_t> seeds{0};
  UncertaintySpec uncertainty;

  int metrics_window = 10;        // steps; active-neuron window
  double error_tail_start = 0.0;  // seconds; tail metrics start here

  WorkbenchForm workbench_form = WorkbenchForm::double_integrator;
  CwForm cw_form = CwForm::velocity_coupled;
  CwParams cw_params;
};

// Everything one closed-loop run produces. Series are sampled on the shared
// time base t[k] = k dt with steps + 1 rows; row k holds the true state, the
// decoded or filtered estimate, the control applied over [t_k, t_k + dt),
// the measurement drawn at t_k, and diag(P_k).
struct RunResult {
  std::vector<double> t;
  Mat x;       // (steps+1) * n_x
  Mat xhat;    // (steps+1) * n_x
  Mat u;       // (steps+1) * n_u
  Mat z;       // (steps+1) * n_z
  Mat p_diag;  // (steps+1) * n_x

  std::vector<SpikeRecord> raster;  // spiking runs only

  Vec tail_error;                 // per state, mean |x_i| over the tail
  double spike_fraction_pct = 0;  // 100 * spikes / (N * steps)
  std::vector<double> active_pct;  // per step, % neurons active in window

  double cost_control = 0.0;  // accumulated quadratic regulator cost
  double cost_spike = 0.0;    // accumulated coding cost (spiking runs)

  std::uint64_t master_seed = 0;
};

// Runs one closed-loop experiment: the true plant integrates with the true
// matrices and shared noise streams; the estimator, regulator gain, and
// network all see the design model scaled by uncertainty.model_scale.
RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

// Mean of |x_i(t)| over t >= t_start, per state.
Vec avg_error_after(const RunResult& r, double t_start);

// 100 * total spikes / (N * steps).
double spike_fraction(const std::vector<SpikeRecord>& raster, int n_neurons,
                      std::int64_t steps);

// Percent of neurons with at least one spike inside the trailing window
// (step - window, step], one value per step 0..steps.
std::vector<double> active_fraction_timeseries(
    const std::vector<SpikeRecord>& raster, int n_neurons, std::int64_t steps,
    int window);

// 3 sqrt(diag P) per row of a diagonal-covariance series.
Mat three_sigma_bounds(const Mat& p_diag);

struct NeuronSweepRow {
  int n_neurons = 0;
  double tail_error = 0.0;  // mean over states and seeds
  bool diverged = false;
};

// Runs cfg at each network size, averaging the tail error over cfg.seeds.
// A size is flagged divergent if any seed raises instability_error or its
// tail error exceeds 10 ||x(0)||.
std::vector<NeuronSweepRow> sweep_neurons(const ExperimentConfig& cfg,
                                          const std::vector<int>& n_list);

struct FiringSweepRow {
  double mu = 0.0;
  double nu = 0.0;
  double norm_error = 0.0;  // tail error / max over the grid
  double spike_pct = 0.0;
};

std::vector<FiringSweepRow> sweep_firing_params(
    const ExperimentConfig& cfg, const std::vector<double>& mu_list,
    const std::vector<double>& nu_list);

struct CompareCell {
  Vec mean_tail_error;  // per state
  Vec std_tail_error;   // per state, over seeds
  double spike_fraction_pct = 0.0;  // spiking runs, mean over seeds
};

struct CompareResult {
  std::vector<Framework> frameworks;
  std::vector<CompareCell> cells;  // one per framework
};

// Runs every framework over cfg.seeds with shared noise draws per seed.
CompareResult compare_frameworks(const ExperimentConfig& cfg,
                                 const std::vector<Framework>& frameworks);

// Aligned text table of a comparison, states as rows.
std::string format_compare_table(const CompareResult& result);

}  // namespace spikereg
