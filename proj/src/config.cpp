#include "spikereg/config.hpp"

#include <cmath>
#include <set>

#include "spikereg/errors.hpp"

namespace spikereg {

namespace {

using nlohmann::json;

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) {
    throw config_error("config key '" + key + "' must be a number");
  }
  return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) {
    throw config_error("config key '" + key + "' must be an integer");
  }
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) {
    throw config_error("config key '" + key + "' must be a boolean");
  }
  return v.get<bool>();
}

std::vector<double> as_number_list(const json& v, const std::string& key) {
  if (!v.is_array()) {
    throw config_error("config key '" + key + "' must be an array");
  }
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_number(e, key));
  return out;
}

}  // namespace

ExperimentConfig scenario_defaults(const std::string& scenario) {
  ExperimentConfig cfg;
  cfg.scenario = scenario;
  if (scenario == "workbench") {
    cfg.duration = 10.0;
    cfg.dt = 0.01;
    cfg.n_neurons = 250;
    cfg.lambda = 0.01;
    cfg.mu = 0.005;
    cfg.nu = 0.005;
    cfg.delta = 0.005;
    cfg.eta_std = 0.0;
    cfg.decoder_variance = 0.25;
    cfg.target_decoder_variance = 1.0 / 300.0;
    cfg.error_tail_start = 6.0;
  } else if (scenario == "cw") {
    cfg.duration = 360.0;
    cfg.dt = 0.1;
    cfg.n_neurons = 350;
    cfg.lambda = 0.001;
    cfg.mu = 1.0;
    cfg.nu = 1e-4;
    cfg.delta = 0.005;
    cfg.eta_std = 0.0;
    cfg.decoder_variance = 1.0 / 50.0;
    cfg.target_decoder_variance = 1.0 / 2500.0;
    cfg.error_tail_start = 300.0;
    // Batch firing reproduces the rendezvous network's population signature:
    // the decaying-orbit transient recruits whole subpopulations at once
    // (high early activity), while greedy firing serializes them away.
    // Nominal accuracy is indistinguishable between the two here; the knob
    // stays greedy on the workbench, whose strong decoder overlaps make
    // synchronous cohorts overshoot.
    cfg.spike_resolution = SpikeResolution::batch;
  } else {
    throw config_error("unknown scenario '" + scenario +
                       "' (expected 'workbench' or 'cw')");
  }
  return cfg;
}

void apply_overrides(ExperimentConfig& cfg, const nlohmann::json& overrides) {
  if (overrides.is_null()) return;
  if (!overrides.is_object()) {
    throw config_error("config overrides must be a JSON object");
  }
  // Scenario switches first so its defaults do not clobber other overrides.
  if (auto it = overrides.find("scenario"); it != overrides.end()) {
    if (!it->is_string()) throw config_error("'scenario' must be a string");
    const std::string name = it->get<std::string>();
    if (name != cfg.scenario) {
      const Framework fw = cfg.framework;
      const auto seeds = cfg.seeds;
      cfg = scenario_defaults(name);
      cfg.framework = fw;
      cfg.seeds = seeds;
    }
  }
  for (const auto& [key, value] : overrides.items()) {
    if (key == "scenario") {
      continue;
    } else if (key == "framework") {
      if (!value.is_string()) {
        throw config_error("'framework' must be a string");
      }
      cfg.framework = framework_from_string(value.get<std::string>());
    } else if (key == "duration") {
      cfg.duration = as_number(value, key);
    } else if (key == "dt") {
      cfg.dt = as_number(value, key);
    } else if (key == "neurons") {
      cfg.n_neurons = as_int(value, key);
    } else if (key == "lambda") {
      cfg.lambda = as_number(value, key);
    } else if (key == "mu") {
      cfg.mu = as_number(value, key);
    } else if (key == "nu") {
      cfg.nu = as_number(value, key);
    } else if (key == "delta") {
      cfg.delta = as_number(value, key);
    } else if (key == "eta_std") {
      cfg.eta_std = as_number(value, key);
    } else if (key == "decoder_variance") {
      cfg.decoder_variance = as_number(value, key);
    } else if (key == "target_decoder_variance") {
      cfg.target_decoder_variance = as_number(value, key);
    } else if (key == "spike_resolution") {
      if (!value.is_string()) {
        throw config_error("'spike_resolution' must be a string");
      }
      cfg.spike_resolution =
          spike_resolution_from_string(value.get<std::string>());
    } else if (key == "noise") {
      cfg.noise = as_bool(value, key);
    } else if (key == "p0_scale") {
      cfg.p0_scale = as_number(value, key);
    } else if (key == "seeds") {
      if (!value.is_array() || value.empty()) {
        throw config_error("'seeds' must be a nonempty array");
      }
      cfg.seeds.clear();
      for (const auto& e : value) {
        if (!e.is_number_integer() || e.get<std::int64_t>() < 0) {
          throw config_error("'seeds' entries must be nonnegative integers");
        }
        cfg.seeds.push_back(e.get<std::uint64_t>());
      }
    } else if (key == "alpha") {
      cfg.uncertainty.model_scale = as_number(value, key);
    } else if (key == "outlier_times") {
      cfg.uncertainty.outlier_times = as_number_list(value, key);
    } else if (key == "outlier_scale") {
      cfg.uncertainty.outlier_scale = as_number(value, key);
    } else if (key == "silence") {
      if (!value.is_array()) throw config_error("'silence' must be an array");
      cfg.uncertainty.silence_schedule.clear();
      for (const auto& e : value) {
        if (!e.is_object() || !e.contains("time") || !e.contains("fraction")) {
          throw config_error(
              "'silence' entries must be {\"time\": t, \"fraction\": f}");
        }
        cfg.uncertainty.silence_schedule.push_back(
            {as_number(e["time"], "silence.time"),
             as_number(e["fraction"], "silence.fraction")});
      }
    } else if (key == "metrics_window") {
      cfg.metrics_window = as_int(value, key);
    } else if (key == "error_tail_start") {
      cfg.error_tail_start = as_number(value, key);
    } else if (key == "workbench_form") {
      if (!value.is_string()) {
        throw config_error("'workbench_form' must be a string");
      }
      const std::string f = value.get<std::string>();
      if (f == "double_integrator") {
        cfg.workbench_form = WorkbenchForm::double_integrator;
      } else if (f == "decoupled") {
        cfg.workbench_form = WorkbenchForm::decoupled;
      } else {
        throw config_error("unknown workbench_form '" + f + "'");
      }
    } else if (key == "cw_form") {
      if (!value.is_string()) throw config_error("'cw_form' must be a string");
      const std::string f = value.get<std::string>();
      if (f == "velocity_coupled") {
        cfg.cw_form = CwForm::velocity_coupled;
      } else if (f == "classic") {
        cfg.cw_form = CwForm::classic;
      } else {
        throw config_error("unknown cw_form '" + f + "'");
      }
    } else if (key == "mu_earth") {
      cfg.cw_params.mu_earth = as_number(value, key);
    } else if (key == "orbit_radius") {
      cfg.cw_params.orbit_radius = as_number(value, key);
    } else {
      throw config_error("unknown config key '" + key + "'");
    }
  }
}

ExperimentConfig resolve_config(const nlohmann::json& file_overrides,
                                const nlohmann::json& cli_overrides) {
  std::string scenario = "workbench";
  if (file_overrides.is_object() && file_overrides.contains("scenario")) {
    if (!file_overrides["scenario"].is_string()) {
      throw config_error("'scenario' must be a string");
    }
    scenario = file_overrides["scenario"].get<std::string>();
  }
  if (cli_overrides.is_object() && cli_overrides.contains("scenario")) {
    if (!cli_overrides["scenario"].is_string()) {
      throw config_error("'scenario' must be a string");
    }
    scenario = cli_overrides["scenario"].get<std::string>();
  }
  ExperimentConfig cfg = scenario_defaults(scenario);
  apply_overrides(cfg, file_overrides);
  // The scenario is already final; re-applying it must not reset the file
  // overrides, so pin it before the CLI layer.
  nlohmann::json cli = cli_overrides;
  if (cli.is_object()) cli.erase("scenario");
  apply_overrides(cfg, cli);
  validate_config(cfg);
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw config_error("dt must be positive");
  if (!(cfg.duration > 0.0)) throw config_error("duration must be positive");
  const double steps = cfg.duration / cfg.dt;
  if (std::abs(steps - std::llround(steps)) > 1e-6) {
    throw config_error("duration must be an integer multiple of dt");
  }
  if (cfg.n_neurons < 1) throw config_error("neurons must be positive");
  if (cfg.lambda < 0.0 || cfg.mu < 0.0 || cfg.nu < 0.0) {
    throw config_error("lambda, mu, nu must be nonnegative");
  }
  if (!(cfg.delta > 0.0)) throw config_error("delta must be positive");
  if (cfg.eta_std < 0.0) throw config_error("eta_std must be nonnegative");
  if (!(cfg.decoder_variance > 0.0) ||
      !(cfg.target_decoder_variance > 0.0)) {
    throw config_error("decoder variances must be positive");
  }
  if (!(cfg.p0_scale > 0.0)) throw config_error("p0_scale must be positive");
  if (cfg.seeds.empty()) throw config_error("at least one seed is required");
  if (cfg.metrics_window < 1) {
    throw config_error("metrics_window must be at least 1");
  }
  if (cfg.error_tail_start < 0.0 || cfg.error_tail_start > cfg.duration) {
    throw config_error("error_tail_start must lie within the run");
  }
  if (!(cfg.uncertainty.model_scale > 0.0)) {
    throw config_error("alpha must be positive");
  }
  if (!(cfg.uncertainty.outlier_scale > 0.0)) {
    throw config_error("outlier_scale must be positive");
  }
  for (double t : cfg.uncertainty.outlier_times) {
    if (t < 0.0 || t >= cfg.duration) {
      throw config_error("outlier times must lie within the run");
    }
  }
  for (const auto& ev : cfg.uncertainty.silence_schedule) {
    if (ev.time < 0.0 || ev.time >= cfg.duration) {
      throw config_error("silence times must lie within the run");
    }
    if (!(ev.fraction > 0.0) || !(ev.fraction < 1.0)) {
      throw config_error("silence fraction must lie in (0, 1)");
    }
  }
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["scenario"] = cfg.scenario;
  j["framework"] = to_string(cfg.framework);
  j["duration"] = cfg.duration;
  j["dt"] = cfg.dt;
  j["neurons"] = cfg.n_neurons;
  j["lambda"] = cfg.lambda;
  j["mu"] = cfg.mu;
  j["nu"] = cfg.nu;
  j["delta"] = cfg.delta;
  j["eta_std"] = cfg.eta_std;
  j["decoder_variance"] = cfg.decoder_variance;
  j["target_decoder_variance"] = cfg.target_decoder_variance;
  j["spike_resolution"] = to_string(cfg.spike_resolution);
  j["noise"] = cfg.noise;
  j["p0_scale"] = cfg.p0_scale;
  j["seeds"] = cfg.seeds;
  j["alpha"] = cfg.uncertainty.model_scale;
  j["outlier_times"] = cfg.uncertainty.outlier_times;
  j["outlier_scale"] = cfg.uncertainty.outlier_scale;
  nlohmann::json silence = nlohmann::json::array();
  for (const auto& ev : cfg.uncertainty.silence_schedule) {
    silence.push_back({{"time", ev.time}, {"fraction", ev.fraction}});
  }
  j["silence"] = silence;
  j["metrics_window"] = cfg.metrics_window;
  j["error_tail_start"] = cfg.error_tail_start;
  j["workbench_form"] = cfg.workbench_form == WorkbenchForm::double_integrator
                            ? "double_integrator"
                            : "decoupled";
  j["cw_form"] =
      cfg.cw_form == CwForm::velocity_coupled ? "velocity_coupled" : "classic";
  j["mu_earth"] = cfg.cw_params.mu_earth;
  j["orbit_radius"] = cfg.cw_params.orbit_radius;
  return j;
}

}  // namespace spikereg
