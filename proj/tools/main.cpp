// Command-line front end: run | compare | sweep | emit-plots.
//
// Config precedence is CLI > config file > scenario defaults; every compute
// command therefore builds a JSON override object from the flags the user
// actually passed and hands it to resolve_config. Exit codes: 0 ok, 2 config
// or usage error, 3 numerical instability.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spikereg/config.hpp"
#include "spikereg/errors.hpp"
#include "spikereg/harness.hpp"
#include "spikereg/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spikereg;

namespace {

// -------------------------------------------------------------------------
// flag plumbing
// -------------------------------------------------------------------------

// Mirrors the override keys resolve_config understands. Only flags the user
// passed end up in the JSON object, so file and default layers stay visible.
struct OverrideFlags {
  std::string config_path;
  std::string scenario;
  std::string framework;
  double duration = 0, dt = 0, lambda = 0, mu = 0, nu = 0, delta = 0;
  double eta_std = 0, decoder_variance = 0, target_decoder_variance = 0;
  double p0_scale = 0, alpha = 0, outlier_scale = 0, error_tail_start = 0;
  int neurons = 0, metrics_window = 0;
  bool noise_on = false, noise_off = false;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> outlier_times;
  std::vector<std::string> silence;
  std::string workbench_form, cw_form;
  std::string spike_resolution;

  void attach(CLI::App* cmd, bool with_framework, bool with_firing = true) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--scenario", scenario, "workbench or cw");
    if (with_framework) {
      cmd->add_option("--framework", framework,
                      "lqg, lqr-msif, or snn-lqr-msif");
    }
    cmd->add_option("--duration", duration, "run length in seconds");
    cmd->add_option("--dt", dt, "integration step in seconds");
    cmd->add_option("--neurons", neurons, "network size");
    cmd->add_option("--lambda", lambda, "rate leak (1/s)");
    if (with_firing) {
      cmd->add_option("--mu", mu, "quadratic firing penalty");
      cmd->add_option("--nu", nu, "linear firing penalty");
    }
    cmd->add_option("--delta", delta, "estimator boundary layer");
    cmd->add_option("--eta-std", eta_std, "membrane noise std");
    cmd->add_option("--decoder-variance", decoder_variance,
                    "estimate decoder entry variance");
    cmd->add_option("--target-decoder-variance", target_decoder_variance,
                    "desired-state decoder entry variance");
    cmd->add_option("--spike-resolution", spike_resolution,
                    "within-step firing order: greedy or batch");
    cmd->add_flag("--noise", noise_on, "enable process/measurement noise");
    cmd->add_flag("--no-noise", noise_off, "disable all noise draws");
    cmd->add_option("--p0-scale", p0_scale, "initial covariance scale");
    cmd->add_option("--seed", seed, "master seed (single run)");
    cmd->add_option("--seeds", seeds, "seed list for averaging")
        ->delimiter(',');
    cmd->add_option("--alpha", alpha, "design-model scale (A_hat = alpha A)");
    cmd->add_option("--outlier-times", outlier_times,
                    "measurement outlier instants, seconds")
        ->delimiter(',');
    cmd->add_option("--outlier-scale", outlier_scale,
                    "noise multiplier at outlier instants");
    cmd->add_option("--silence", silence,
                    "neuron silencing events as time:fraction")
        ->delimiter(',');
    cmd->add_option("--metrics-window", metrics_window,
                    "active-neuron window, steps");
    cmd->add_option("--error-tail-start", error_tail_start,
                    "tail metrics start, seconds");
    cmd->add_option("--workbench-form", workbench_form,
                    "double_integrator or decoupled");
    cmd->add_option("--cw-form", cw_form, "velocity_coupled or classic");
  }

  json to_json(const CLI::App* cmd) const {
    json j = json::object();
    auto passed = [cmd](const std::string& name) {
      return cmd->count(name) > 0;
    };
    if (passed("--scenario")) j["scenario"] = scenario;
    if (cmd->get_option_no_throw("--framework") && passed("--framework")) {
      j["framework"] = framework;
    }
    if (passed("--duration")) j["duration"] = duration;
    if (passed("--dt")) j["dt"] = dt;
    if (passed("--neurons")) j["neurons"] = neurons;
    if (passed("--lambda")) j["lambda"] = lambda;
    if (cmd->get_option_no_throw("--mu") && passed("--mu")) j["mu"] = mu;
    if (cmd->get_option_no_throw("--nu") && passed("--nu")) j["nu"] = nu;
    if (passed("--delta")) j["delta"] = delta;
    if (passed("--eta-std")) j["eta_std"] = eta_std;
    if (passed("--decoder-variance")) j["decoder_variance"] = decoder_variance;
    if (passed("--target-decoder-variance")) {
      j["target_decoder_variance"] = target_decoder_variance;
    }
    if (passed("--spike-resolution")) j["spike_resolution"] = spike_resolution;
    if (noise_on && noise_off) {
      throw config_error("--noise and --no-noise conflict");
    }
    if (noise_on) j["noise"] = true;
    if (noise_off) j["noise"] = false;
    if (passed("--p0-scale")) j["p0_scale"] = p0_scale;
    if (passed("--seed") && passed("--seeds")) {
      throw config_error("--seed and --seeds conflict");
    }
    if (passed("--seed")) j["seeds"] = {seed};
    if (passed("--seeds")) j["seeds"] = seeds;
    if (passed("--alpha")) j["alpha"] = alpha;
    if (passed("--outlier-times")) j["outlier_times"] = outlier_times;
    if (passed("--outlier-scale")) j["outlier_scale"] = outlier_scale;
    if (passed("--silence")) {
      json events = json::array();
      for (const std::string& s : silence) {
        const auto colon = s.find(':');
        if (colon == std::string::npos) {
          throw config_error("--silence events take the form time:fraction");
        }
        try {
          events.push_back({{"time", std::stod(s.substr(0, colon))},
                            {"fraction", std::stod(s.substr(colon + 1))}});
        } catch (const std::exception&) {
          throw config_error("bad --silence event '" + s + "'");
        }
      }
      j["silence"] = events;
    }
    if (passed("--metrics-window")) j["metrics_window"] = metrics_window;
    if (passed("--error-tail-start")) j["error_tail_start"] = error_tail_start;
    if (passed("--workbench-form")) j["workbench_form"] = workbench_form;
    if (passed("--cw-form")) j["cw_form"] = cw_form;
    return j;
  }
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw config_error("cannot read config file " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw config_error("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw config_error("config file must hold an object");
  return j;
}

// Scenario must come from somewhere explicit; the library defaults are for
// programmatic use only. When no layer names seeds, SPIKEREG_SEED fills in,
// then n_default_seeds picks how many sequential seeds the command wants
// (compare averages over 10 by default, run takes the single seed 0).
ExperimentConfig resolve_from_layers(const json& file_j, json cli_j,
                                     int n_default_seeds = 1) {
  if (!file_j.contains("scenario") && !cli_j.contains("scenario")) {
    throw config_error("scenario is required (--scenario or config file)");
  }
  if (!file_j.contains("seeds") && !cli_j.contains("seeds")) {
    if (const char* env = std::getenv("SPIKEREG_SEED")) {
      try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument("");
        cli_j["seeds"] = {static_cast<std::uint64_t>(v)};
      } catch (const std::exception&) {
        throw config_error(std::string("SPIKEREG_SEED is not a seed: '") +
                           env + "'");
      }
    } else {
      std::vector<std::uint64_t> seeds;
      for (int i = 0; i < n_default_seeds; ++i) seeds.push_back(i);
      cli_j["seeds"] = seeds;
    }
  }
  return resolve_config(file_j, cli_j);
}

std::vector<std::string> state_labels(int n_states) {
  if (n_states == 6) return {"x", "y", "z", "v_x", "v_y", "v_z"};
  std::vector<std::string> out;
  for (int i = 1; i <= n_states; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

// -------------------------------------------------------------------------
// subcommand bodies
// -------------------------------------------------------------------------

int cmd_run(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const std::uint64_t seed = cfg.seeds.front();
  const RunResult result = run_experiment(cfg, seed);
  write_run(out_dir, cfg, result);

  const auto labels = state_labels(static_cast<int>(result.x.cols()));
  std::cout << "tail |x| means from t = " << cfg.error_tail_start << " s\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::printf("  %-4s %.6g\n", labels[i].c_str(), result.tail_error[i]);
  }
  if (cfg.framework == Framework::snn_lqr_msif) {
    std::printf("  spikes used: %.3g%% of possible\n",
                result.spike_fraction_pct);
  }
  std::cout << "wrote " << (out_dir / "trajectories.csv").string() << '\n';
  return 0;
}

int cmd_compare(const ExperimentConfig& cfg,
                const std::vector<std::string>& names,
                const fs::path& out_dir) {
  std::vector<Framework> frameworks;
  for (const std::string& name : names) {
    const Framework fw = framework_from_string(name);
    if (std::find(frameworks.begin(), frameworks.end(), fw) !=
        frameworks.end()) {
      std::cerr << "warning: framework '" << name << "' listed twice, "
                << "running it once\n";
      continue;
    }
    frameworks.push_back(fw);
  }
  const CompareResult result = compare_frameworks(cfg, frameworks);
  std::cout << format_compare_table(result);
  fs::create_directories(out_dir);
  const auto labels =
      state_labels(static_cast<int>(result.cells[0].mean_tail_error.size()));
  write_compare_csv(out_dir / "compare.csv", result, labels);
  std::cout << "wrote " << (out_dir / "compare.csv").string() << '\n';
  return 0;
}

// "50:400:50" (inclusive range) or "50,100,250".
std::vector<int> parse_neuron_list(const std::string& text) {
  std::vector<int> out;
  try {
    if (text.find(':') != std::string::npos) {
      std::istringstream is(text);
      std::string a, b, c;
      if (!std::getline(is, a, ':') || !std::getline(is, b, ':') ||
          !std::getline(is, c)) {
        throw config_error("range takes the form start:stop:step");
      }
      const int start = std::stoi(a), stop = std::stoi(b), step = std::stoi(c);
      if (step <= 0 || stop < start) {
        throw config_error("range takes the form start:stop:step, step > 0");
      }
      for (int n = start; n <= stop; n += step) out.push_back(n);
    } else {
      std::istringstream is(text);
      std::string cell;
      while (std::getline(is, cell, ',')) out.push_back(std::stoi(cell));
    }
  } catch (const config_error&) {
    throw;
  } catch (const std::exception&) {
    throw config_error("bad neuron list '" + text + "'");
  }
  if (out.empty()) throw config_error("neuron list is empty");
  return out;
}

int cmd_sweep_neurons(const ExperimentConfig& cfg, const std::string& list,
                      const fs::path& out_dir) {
  const std::vector<int> n_list = parse_neuron_list(list);
  const auto rows = sweep_neurons(cfg, n_list);
  fs::create_directories(out_dir);
  write_neuron_sweep_csv(out_dir / "neuron_sweep.csv", rows);
  std::printf("%10s %14s %s\n", "neurons", "tail error", "diverged");
  for (const auto& row : rows) {
    std::printf("%10d %14.6g %s\n", row.n_neurons, row.tail_error,
                row.diverged ? "yes" : "no");
  }
  std::cout << "wrote " << (out_dir / "neuron_sweep.csv").string() << '\n';
  return 0;
}

int cmd_sweep_firing(const ExperimentConfig& cfg,
                     const std::vector<double>& mu_list,
                     const std::vector<double>& nu_list,
                     const fs::path& out_dir) {
  if (mu_list.empty() || nu_list.empty()) {
    throw config_error("sweep firing-params needs --mu and --nu lists");
  }
  const auto rows = sweep_firing_params(cfg, mu_list, nu_list);
  fs::create_directories(out_dir);
  write_firing_sweep_csv(out_dir / "firing_sweep.csv", rows);
  std::printf("%12s %12s %12s %10s\n", "mu", "nu", "norm error", "spike %");
  for (const auto& row : rows) {
    std::printf("%12g %12g %12.4g %10.3g\n", row.mu, row.nu, row.norm_error,
                row.spike_pct);
  }
  std::cout << "wrote " << (out_dir / "firing_sweep.csv").string() << '\n';
  return 0;
}

int cmd_emit_plots(const fs::path& run_dir) {
  const auto written = emit_plots(run_dir);
  for (const auto& p : written) std::cout << "wrote " << p.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop estimation and control experiments: spiking "
               "network against LQG and sliding-innovation baselines"};
  app.require_subcommand(1);

  OverrideFlags run_flags;
  std::string run_out = "out/run";
  CLI::App* run = app.add_subcommand("run", "one closed-loop run, stored");
  run_flags.attach(run, true);
  run->add_option("--out", run_out, "output directory");

  OverrideFlags cmp_flags;
  std::string cmp_out = "out/compare";
  std::vector<std::string> cmp_names{"lqg", "lqr-msif", "snn-lqr-msif"};
  CLI::App* cmp =
      app.add_subcommand("compare", "frameworks side by side, seed-averaged");
  cmp_flags.attach(cmp, false);
  cmp->add_option("--frameworks", cmp_names, "comma list of frameworks")
      ->delimiter(',');
  cmp->add_option("--out", cmp_out, "output directory");

  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweeps");
  sweep->require_subcommand(1);

  OverrideFlags swn_flags;
  std::string swn_out = "out/sweep";
  std::string swn_list = "50:400:50";
  CLI::App* swn = sweep->add_subcommand("neurons", "network-size sweep");
  swn_flags.attach(swn, false);
  swn->add_option("--list", swn_list, "sizes, start:stop:step or comma list");
  swn->add_option("--out", swn_out, "output directory");

  OverrideFlags swf_flags;
  std::string swf_out = "out/sweep";
  std::vector<double> swf_mu, swf_nu;
  CLI::App* swf =
      sweep->add_subcommand("firing-params", "mu/nu firing-penalty grid");
  swf_flags.attach(swf, false, /*with_firing=*/false);
  swf->add_option("--mu", swf_mu, "mu grid values")->delimiter(',');
  swf->add_option("--nu", swf_nu, "nu grid values")->delimiter(',');
  swf->add_option("--out", swf_out, "output directory");

  std::string plots_run_dir;
  CLI::App* plots = app.add_subcommand(
      "emit-plots", "derive plot-ready CSVs from a stored run");
  plots->add_option("--run", plots_run_dir, "stored run directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      const ExperimentConfig cfg = resolve_from_layers(
          load_config_file(run_flags.config_path), run_flags.to_json(run));
      return cmd_run(cfg, run_out);
    }
    if (cmp->parsed()) {
      const ExperimentConfig cfg =
          resolve_from_layers(load_config_file(cmp_flags.config_path),
                              cmp_flags.to_json(cmp), 10);
      return cmd_compare(cfg, cmp_names, cmp_out);
    }
    if (swn->parsed()) {
      const ExperimentConfig cfg =
          resolve_from_layers(load_config_file(swn_flags.config_path),
                              swn_flags.to_json(swn), 10);
      return cmd_sweep_neurons(cfg, swn_list, swn_out);
    }
    if (swf->parsed()) {
      json cli_j = swf_flags.to_json(swf);
      cli_j.erase("mu");  // grid lists, not scalar overrides
      cli_j.erase("nu");
      const ExperimentConfig cfg = resolve_from_layers(
          load_config_file(swf_flags.config_path), cli_j);
      return cmd_sweep_firing(cfg, swf_mu, swf_nu, swf_out);
    }
    if (plots->parsed()) {
      return cmd_emit_plots(plots_run_dir);
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const instability_error& e) {
    std::cerr << "numerical instability: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
