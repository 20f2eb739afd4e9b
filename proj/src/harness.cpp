#include "spikereg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "spikereg/config.hpp"
#include "spikereg/errors.hpp"
#include "spikereg/filters.hpp"
#include "spikereg/regulator.hpp"

namespace spikereg {

std::string to_string(Framework f) {
  switch (f) {
    case Framework::lqg:
      return "lqg";
    case Framework::lqr_msif:
      return "lqr-msif";
    case Framework::snn_lqr_msif:
      return "snn-lqr-msif";
  }
  throw config_error("unhandled framework");
}

Framework framework_from_string(const std::string& name) {
  if (name == "lqg") return Framework::lqg;
  if (name == "lqr-msif") return Framework::lqr_msif;
  if (name == "snn-lqr-msif") return Framework::snn_lqr_msif;
  throw config_error("unknown framework '" + name +
                     "' (expected lqg, lqr-msif, or snn-lqr-msif)");
}

namespace {

struct ScenarioSetup {
  LtiModel model;  // true plant
  Vec x0;
  Vec xhat0;
  Mat Qc;  // regulator state weight
  Mat Rc;  // regulator input weight
};

ScenarioSetup scenario_setup(const ExperimentConfig& cfg) {
  ScenarioSetup s;
  if (cfg.scenario == "workbench") {
    s.model = build_workbench(cfg.workbench_form);
    s.model.dt = cfg.dt;
    s.x0 = Vec(2);
    s.x0 << 10.0, 1.0;
    s.xhat0 = s.x0;
    s.Qc = Mat::Identity(2, 2);
    s.Rc = Mat::Identity(1, 1);
  } else if (cfg.scenario == "cw") {
    const double n = mean_motion(cfg.cw_params);
    s.model = build_cw(n, cfg.dt, Mat::Identity(6, 6) * 1e-12,
                       Mat::Identity(3, 3) * 1e-2, cfg.cw_form);
    s.x0 = Vec(6);
    s.x0 << 70.0, 30.0, -5.0, -1.7, -0.9, 0.25;
    s.xhat0 = s.x0;
    s.Qc = Mat::Identity(6, 6) * 1e-6;
    s.Rc = Mat::Identity(3, 3);
  } else {
    throw config_error("unknown scenario '" + cfg.scenario + "'");
  }
  return s;
}

std::int64_t step_of(double time, double dt) {
  return std::llround(time / dt);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
  validate_config(cfg);
  const ScenarioSetup setup = scenario_setup(cfg);
  const LtiModel& model = setup.model;
  LtiModel design = model;
  design.A *= cfg.uncertainty.model_scale;

  const int n_x = model.n_states();
  const int n_u = model.n_inputs();
  const int n_z = model.n_outputs();
  const std::int64_t steps = step_of(cfg.duration, cfg.dt);
  const double dt = cfg.dt;

  const LqrDesign lqr = design_lqr(design.A, design.B, setup.Qc, setup.Rc);
  const DesiredState desired = zero_desired(n_x);

  auto plant_gen = make_stream(seed, noise_stream::plant);
  auto meas_gen = make_stream(seed, noise_stream::measurement);
  auto membrane_gen = make_stream(seed, noise_stream::membrane);

  std::set<std::int64_t> outlier_steps;
  for (double t : cfg.uncertainty.outlier_times) {
    outlier_steps.insert(step_of(t, dt));
  }
  std::map<std::int64_t, double> silence_steps;
  for (const auto& ev : cfg.uncertainty.silence_schedule) {
    silence_steps[step_of(ev.time, dt)] = ev.fraction;
  }

  const bool spiking = cfg.framework == Framework::snn_lqr_msif;
  SpikingNetwork net;
  Mat D_u;
  if (spiking) {
    auto dec_gen = make_stream(seed, noise_stream::decoder);
    auto dec_t_gen = make_stream(seed, noise_stream::decoder_target);
    DecoderPair dec;
    dec.D = sample_decoder(n_x, cfg.n_neurons, cfg.decoder_variance, dec_gen);
    dec.D_target = sample_decoder(n_x, cfg.n_neurons,
                                  cfg.target_decoder_variance, dec_t_gen);
    dec.variance = cfg.decoder_variance;
    dec.target_variance = cfg.target_decoder_variance;
    net = build_network(design, lqr.K, dec, cfg.lambda, cfg.mu, cfg.nu,
                        cfg.eta_std, setup.xhat0, desired);
    net.resolution = cfg.spike_resolution;
    D_u = control_decoder(lqr.K, net.D, net.D_target);
  }

  FilterState fs{setup.xhat0, cfg.p0_scale * Mat::Identity(n_x, n_x), 0.0};
  Mat P = fs.P;
  PlantState ps{setup.x0, 0.0};
  const EstimatorVariant variant = cfg.framework == Framework::lqg
                                       ? EstimatorVariant::kalman
                                       : EstimatorVariant::msif;
  const MsifConfig msif{cfg.delta};

  RunResult res;
  res.master_seed = seed;
  res.t.resize(steps + 1);
  res.x.resize(steps + 1, n_x);
  res.xhat.resize(steps + 1, n_x);
  res.u.resize(steps + 1, n_u);
  res.z.resize(steps + 1, n_z);
  res.p_diag.resize(steps + 1, n_x);

  for (std::int64_t k = 0; k <= steps; ++k) {
    if (spiking) {
      if (auto it = silence_steps.find(k); it != silence_steps.end()) {
        const int n_mute = static_cast<int>(
            std::ceil(it->second * cfg.n_neurons));
        std::vector<bool> mask(cfg.n_neurons, false);
        for (int i = 0; i < n_mute && i < cfg.n_neurons; ++i) mask[i] = true;
        silence_neurons(net, mask);
      }
    }

    const Vec xhat_k = spiking ? decode_state(net.D, net.rate) : fs.xhat;
    const Vec u_k = spiking ? Vec(D_u * net.rate)
                            : control_law(lqr.K, fs.xhat, desired.x);
    const double scale =
        outlier_steps.count(k) ? cfg.uncertainty.outlier_scale : 1.0;
    const Vec z_k = measure(model, ps.x, meas_gen, cfg.noise, scale);

    res.t[k] = k * dt;
    res.x.row(k) = ps.x.transpose();
    res.xhat.row(k) = xhat_k.transpose();
    res.u.row(k) = u_k.transpose();
    res.z.row(k) = z_k.transpose();
    res.p_diag.row(k) = P.diagonal().transpose();

    if (k == steps) break;

    res.cost_control +=
        dt * (ps.x.dot(setup.Qc * ps.x) + u_k.dot(setup.Rc * u_k));
    if (spiking) {
      res.cost_spike +=
          spike_cost(ps.x, xhat_k, net.rate, cfg.nu, cfg.mu, dt);
      const Mat P_zz = innovation_covariance(P, design.C, design.R);
      update_adaptive_weights(net, P_zz, design.C, cfg.delta);
      std::vector<int> fired =
          network_step(net, z_k, desired, dt, membrane_gen);
      if (!fired.empty()) {
        res.raster.push_back(SpikeRecord{k, std::move(fired)});
      }
      P = kf_riccati_step(P, design, dt);
    } else {
      fs = estimator_step(fs, design, u_k, z_k, variant, msif, dt);
      P = fs.P;
    }
    ps = step_plant(model, ps, u_k, plant_gen, cfg.noise);
  }

  res.tail_error = avg_error_after(res, cfg.error_tail_start);
  if (spiking) {
    res.spike_fraction_pct = spike_fraction(res.raster, cfg.n_neurons, steps);
    res.active_pct = active_fraction_timeseries(res.raster, cfg.n_neurons,
                                                steps, cfg.metrics_window);
  }
  return res;
}

Vec avg_error_after(const RunResult& r, double t_start) {
  const auto rows = r.x.rows();
  if (rows == 0) throw config_error("empty run");
  Vec acc = Vec::Zero(r.x.cols());
  std::int64_t count = 0;
  for (Eigen::Index k = 0; k < rows; ++k) {
    if (r.t[k] >= t_start - 1e-12) {
      acc += r.x.row(k).cwiseAbs().transpose();
      ++count;
    }
  }
  if (count == 0) throw config_error("tail start lies past the end of run");
  return acc / static_cast<double>(count);
}

double spike_fraction(const std::vector<SpikeRecord>& raster, int n_neurons,
                      std::int64_t steps) {
  if (n_neurons < 1 || steps < 1) {
    throw config_error("spike fraction needs a nonempty run");
  }
  std::int64_t total = 0;
  for (const auto& rec : raster) total += rec.neurons.size();
  return 100.0 * static_cast<double>(total) /
         (static_cast<double>(n_neurons) * static_cast<double>(steps));
}

std::vector<double> active_fraction_timeseries(
    const std::vector<SpikeRecord>& raster, int n_neurons, std::int64_t steps,
    int window) {
  if (window < 1) throw config_error("window must be at least 1");
  // Distinct neurons with a spike in (k - window, k], per step.
  std::vector<std::vector<int>> by_step(steps + 1);
  for (const auto& rec : raster) {
    if (rec.step < 0 || rec.step > steps) {
      throw config_error("raster step index out of range");
    }
    auto& dst = by_step[rec.step];
    dst.insert(dst.end(), rec.neurons.begin(), rec.neurons.end());
  }
  std::vector<int> hits(n_neurons, 0);
  int distinct = 0;
  std::vector<double> out(steps + 1, 0.0);
  for (std::int64_t k = 0; k <= steps; ++k) {
    for (int nrn : by_step[k]) {
      if (hits[nrn]++ == 0) ++distinct;
    }
    const std::int64_t drop = k - window;
    if (drop >= 0) {
      for (int nrn : by_step[drop]) {
        if (--hits[nrn] == 0) --distinct;
      }
    }
    out[k] = 100.0 * distinct / n_neurons;
  }
  return out;
}

Mat three_sigma_bounds(const Mat& p_diag) {
  if ((p_diag.array() < -1e-12).any()) {
    throw config_error("covariance diagonal must be nonnegative");
  }
  return 3.0 * p_diag.cwiseMax(0.0).cwiseSqrt();
}

std::vector<NeuronSweepRow> sweep_neurons(const ExperimentConfig& cfg,
                                          const std::vector<int>& n_list) {
  if (n_list.empty()) throw config_error("neuron sweep list is empty");
  ExperimentConfig base = cfg;
  base.framework = Framework::snn_lqr_msif;
  const double x0_norm = scenario_setup(base).x0.norm();
  std::vector<NeuronSweepRow> rows;
  for (int n : n_list) {
    ExperimentConfig c = base;
    c.n_neurons = n;
    NeuronSweepRow row;
    row.n_neurons = n;
    double acc = 0.0;
    int ok = 0;
    for (std::uint64_t seed : c.seeds) {
      try {
        const RunResult r = run_experiment(c, seed);
        const double err = r.tail_error.mean();
        if (!std::isfinite(err) || err > 10.0 * x0_norm) {
          row.diverged = true;
        }
        if (std::isfinite(err)) {
          acc += err;
          ++ok;
        }
      } catch (const instability_error&) {
        row.diverged = true;
      }
    }
    row.tail_error = ok > 0 ? acc / ok
                            : std::numeric_limits<double>::infinity();
    rows.push_back(row);
  }
  return rows;
}

std::vector<FiringSweepRow> sweep_firing_params(
    const ExperimentConfig& cfg, const std::vector<double>& mu_list,
    const std::vector<double>& nu_list) {
  if (mu_list.empty() || nu_list.empty()) {
    throw config_error("firing parameter grid is empty");
  }
  ExperimentConfig base = cfg;
  base.framework = Framework::snn_lqr_msif;
  std::vector<FiringSweepRow> rows;
  double max_err = 0.0;
  for (double mu : mu_list) {
    for (double nu : nu_list) {
      ExperimentConfig c = base;
      c.mu = mu;
      c.nu = nu;
      FiringSweepRow row;
      row.mu = mu;
      row.nu = nu;
      double err_acc = 0.0;
      double spike_acc = 0.0;
      int ok = 0;
      for (std::uint64_t seed : c.seeds) {
        try {
          const RunResult r = run_experiment(c, seed);
          err_acc += r.tail_error.mean();
          spike_acc += r.spike_fraction_pct;
          ++ok;
        } catch (const instability_error&) {
          err_acc = std::numeric_limits<double>::infinity();
          ok = std::max(ok, 1);
          break;
        }
      }
      row.norm_error = ok > 0 ? err_acc / ok
                              : std::numeric_limits<double>::infinity();
      row.spike_pct = ok > 0 ? spike_acc / ok : 0.0;
      if (std::isfinite(row.norm_error)) {
        max_err = std::max(max_err, row.norm_error);
      }
      rows.push_back(row);
    }
  }
  if (max_err > 0.0) {
    for (auto& row : rows) row.norm_error /= max_err;
  }
  return rows;
}

CompareResult compare_frameworks(const ExperimentConfig& cfg,
                                 const std::vector<Framework>& frameworks) {
  if (frameworks.empty()) throw config_error("no frameworks to compare");
  CompareResult out;
  for (Framework fw : frameworks) {
    if (std::find(out.frameworks.begin(), out.frameworks.end(), fw) !=
        out.frameworks.end()) {
      continue;  // duplicates collapse to one run
    }
    ExperimentConfig c = cfg;
    c.framework = fw;
    Mat tails(static_cast<Eigen::Index>(cfg.seeds.size()), 0);
    double spike_acc = 0.0;
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      const RunResult r = run_experiment(c, cfg.seeds[i]);
      if (tails.cols() == 0) {
        tails.resize(static_cast<Eigen::Index>(cfg.seeds.size()),
                     r.tail_error.size());
      }
      tails.row(static_cast<Eigen::Index>(i)) = r.tail_error.transpose();
      spike_acc += r.spike_fraction_pct;
    }
    CompareCell cell;
    cell.mean_tail_error = tails.colwise().mean().transpose();
    Mat centered = tails.rowwise() - tails.colwise().mean();
    cell.std_tail_error =
        (centered.array().square().colwise().sum() /
         std::max<double>(1.0, static_cast<double>(tails.rows()) - 1.0))
            .sqrt()
            .matrix()
            .transpose();
    cell.spike_fraction_pct =
        spike_acc / static_cast<double>(cfg.seeds.size());
    out.frameworks.push_back(fw);
    out.cells.push_back(std::move(cell));
  }
  return out;
}

std::string format_compare_table(const CompareResult& result) {
  if (result.frameworks.empty()) return "";
  const int n_states = static_cast<int>(result.cells[0].mean_tail_error.size());
  std::vector<std::string> labels;
  if (n_states == 6) {
    labels = {"x", "y", "z", "v_x", "v_y", "v_z"};
  } else {
    for (int i = 0; i < n_states; ++i) {
      labels.push_back("x" + std::to_string(i + 1));
    }
  }
  std::ostringstream os;
  char buf[64];
  os << "state";
  for (Framework fw : result.frameworks) {
    std::snprintf(buf, sizeof(buf), "%16s", to_string(fw).c_str());
    os << buf;
  }
  os << '\n';
  for (int i = 0; i < n_states; ++i) {
    std::snprintf(buf, sizeof(buf), "%-5s", labels[i].c_str());
    os << buf;
    for (const auto& cell : result.cells) {
      std::snprintf(buf, sizeof(buf), "%16.4g", cell.mean_tail_error[i]);
      os << buf;
    }
    os << '\n';
  }
  bool any_spiking = false;
  for (std::size_t j = 0; j < result.frameworks.size(); ++j) {
    if (result.frameworks[j] == Framework::snn_lqr_msif) any_spiking = true;
  }
  if (any_spiking) {
    os << "spike%";
    for (std::size_t j = 0; j < result.frameworks.size(); ++j) {
      if (result.frameworks[j] == Framework::snn_lqr_msif) {
        std::snprintf(buf, sizeof(buf), "%15.3g",
                      result.cells[j].spike_fraction_pct);
      } else {
        std::snprintf(buf, sizeof(buf), "%15s", "-");
      }
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace spikereg
