#include "spikereg/spiking.hpp"

#include <cmath>

#include "spikereg/errors.hpp"
#include "spikereg/filters.hpp"

namespace spikereg {

std::string to_string(SpikeResolution r) {
  return r == SpikeResolution::greedy ? "greedy" : "batch";
}

SpikeResolution spike_resolution_from_string(const std::string& name) {
  if (name == "greedy") return SpikeResolution::greedy;
  if (name == "batch") return SpikeResolution::batch;
  throw config_error("unknown spike resolution '" + name +
                     "' (expected greedy or batch)");
}

Mat sample_decoder(int n_states, int n_neurons, double variance,
                   std::mt19937_64& gen) {
  if (n_states < 1 || n_neurons < 1) {
    throw config_error("decoder dimensions must be positive");
  }
  if (!(variance > 0.0)) {
    throw config_error("decoder variance must be positive");
  }
  std::normal_distribution<double> entry(0.0, std::sqrt(variance));
  Mat D(n_states, n_neurons);
  for (int j = 0; j < n_neurons; ++j) {
    do {
      for (int i = 0; i < n_states; ++i) {
        D(i, j) = entry(gen);
      }
    } while (D.col(j).norm() < 1e-12);
  }
  return D;
}

Vec thresholds(const Mat& D, double nu, double mu, double lambda) {
  if (nu < 0.0 || mu < 0.0 || lambda < 0.0) {
    throw config_error("firing parameters must be nonnegative");
  }
  const Vec energy = D.colwise().squaredNorm().transpose();
  return 0.5 * (energy.array() + nu * lambda + mu * lambda * lambda);
}

void synthesize_static_weights(SpikingNetwork& net, const LtiModel& design,
                               const Mat& K) {
  const auto n = design.A.rows();
  if (net.D.rows() != n || net.D_target.rows() != n) {
    throw config_error("decoder rows must match the state dimension");
  }
  if (K.rows() != design.B.cols() || K.cols() != n) {
    throw config_error("gain must map states to inputs");
  }
  const int N = net.n_neurons();
  const double reg = net.mu * net.lambda * net.lambda;
  const Mat Dt = net.D.transpose();
  net.F_in = Dt * design.B;
  net.Omega_slow = Dt * (design.A + net.lambda * Mat::Identity(n, n)) * net.D;
  net.Omega_fast = -(Dt * net.D + reg * Mat::Identity(N, N));
  net.Omega_ctrl = -Dt * design.B * K * net.D;
  net.Omega_ctrl_target = Dt * design.B * K * net.D_target;
  net.Omega_fast_target =
      -(net.D_target.transpose() * net.D_target + reg * Mat::Identity(N, N));
}

void update_adaptive_weights(SpikingNetwork& net, const Mat& P_zz,
                             const Mat& C, double delta) {
  const Mat G = msif_gain(P_zz, C, delta);
  net.F_meas = net.D.transpose() * G;
  net.Omega_meas = -net.F_meas * (C * net.D);
}

SpikingNetwork build_network(const LtiModel& design, const Mat& K,
                             const DecoderPair& dec, double lambda, double mu,
                             double nu, double eta_std, const Vec& xhat0,
                             const DesiredState& desired0) {
  if (dec.D.rows() != dec.D_target.rows() ||
      dec.D.cols() != dec.D_target.cols()) {
    throw config_error("decoder pair must share one shape");
  }
  if (xhat0.size() != dec.D.rows() || desired0.x.size() != dec.D.rows()) {
    throw config_error("initial vectors must match the decoder rows");
  }
  if (eta_std < 0.0) throw config_error("eta_std must be nonnegative");
  SpikingNetwork net;
  net.D = dec.D;
  net.D_target = dec.D_target;
  net.lambda = lambda;
  net.mu = mu;
  net.nu = nu;
  net.eta_std = eta_std;
  net.threshold = thresholds(net.D, nu, mu, lambda);
  synthesize_static_weights(net, design, K);
  const int N = net.n_neurons();
  net.Omega_meas = Mat::Zero(N, N);
  net.F_meas = Mat::Zero(N, design.C.rows());
  // The membrane starts at the projected initial estimate (and desired
  // state); running the exact firing rule once converts that projection
  // into rates, so the decoded readouts start on the initial estimate
  // instead of slewing up from zero. The membrane keeps the sub-threshold
  // residual of the encoding.
  net.sigma = net.D.transpose() * xhat0 + net.D_target.transpose() * desired0.x;
  net.rate = Vec::Zero(N);
  net.silenced.assign(N, 0);
  resolve_spikes(net);
  return net;
}

std::vector<int> resolve_spikes(SpikingNetwork& net) {
  const int N = net.n_neurons();
  const std::int64_t budget = 10LL * N;
  std::vector<int> fired;
  for (std::int64_t count = 0;; ++count) {
    int best = -1;
    double best_margin = 0.0;
    for (int i = 0; i < N; ++i) {
      if (net.silenced[i]) continue;
      const double margin = net.sigma[i] - net.threshold[i];
      if (margin > 0.0 && (best < 0 || margin > best_margin)) {
        best = i;
        best_margin = margin;
      }
    }
    if (best < 0) break;
    if (count >= budget) {
      throw instability_error("firing budget exhausted: runaway spiking",
                              net.step_count);
    }
    net.sigma += net.Omega_fast.col(best) + net.Omega_fast_target.col(best);
    net.rate[best] += 1.0;
    fired.push_back(best);
  }
  return fired;
}

std::vector<int> resolve_spikes_batch(SpikingNetwork& net) {
  const int N = net.n_neurons();
  std::vector<int> fired;
  for (int i = 0; i < N; ++i) {
    if (net.silenced[i]) continue;
    if (net.sigma[i] > net.threshold[i]) fired.push_back(i);
  }
  if (!fired.empty()) {
    Vec cohort = Vec::Zero(N);
    for (int i : fired) cohort[i] = 1.0;
    net.sigma.noalias() += net.Omega_fast * cohort;
    net.sigma.noalias() += net.Omega_fast_target * cohort;
    net.rate += cohort;
  }
  // The cohort lands without mutual inhibition, so overlapping neurons
  // overcorrect together; settle the knock-on crossings greedily so the
  // step still ends quiescent.
  const std::vector<int> settled = resolve_spikes(net);
  fired.insert(fired.end(), settled.begin(), settled.end());
  return fired;
}

std::vector<int> network_step(SpikingNetwork& net, const Vec& z,
                              const DesiredState& desired, double dt,
                              std::mt19937_64& gen) {
  if (z.size() != net.F_meas.cols()) {
    throw config_error("measurement dimension does not match the network");
  }
  if (desired.x.size() != net.n_states() ||
      desired.x_dot.size() != net.n_states()) {
    throw config_error("desired state dimension does not match the network");
  }
  if (!(dt >= 0.0)) throw config_error("dt must be nonnegative");

  Vec drift = -net.lambda * net.sigma;
  drift.noalias() += net.Omega_slow * net.rate;
  drift.noalias() += net.Omega_ctrl * net.rate;
  drift.noalias() += net.Omega_ctrl_target * net.rate;
  drift.noalias() += net.Omega_meas * net.rate;
  drift.noalias() += net.F_meas * z;
  drift.noalias() +=
      net.D_target.transpose() * (desired.x_dot + net.lambda * desired.x);
  net.sigma += dt * drift;
  if (net.eta_std > 0.0 && dt > 0.0) {
    std::normal_distribution<double> eta(0.0, net.eta_std * std::sqrt(dt));
    for (int i = 0; i < net.n_neurons(); ++i) {
      net.sigma[i] += eta(gen);
    }
  }

  net.rate *= (1.0 - net.lambda * dt);

  for (int i = 0; i < net.n_neurons(); ++i) {
    if (net.silenced[i]) net.sigma[i] = 0.0;
  }
  std::vector<int> fired = net.resolution == SpikeResolution::greedy
                               ? resolve_spikes(net)
                               : resolve_spikes_batch(net);
  for (int i = 0; i < net.n_neurons(); ++i) {
    if (net.silenced[i]) net.sigma[i] = 0.0;
  }
  net.step_count += 1;
  return fired;
}

Vec decode_state(const Mat& D, const Vec& rate) {
  if (rate.size() != D.cols()) {
    throw config_error("rate dimension does not match the decoder");
  }
  return D * rate;
}

Mat control_decoder(const Mat& K, const Mat& D, const Mat& D_target) {
  if (K.cols() != D.rows() || D.rows() != D_target.rows() ||
      D.cols() != D_target.cols()) {
    throw config_error("gain and decoders have mismatched shapes");
  }
  return -K * (D - D_target);
}

Vec decode_control(const Mat& K, const Mat& D, const Mat& D_target,
                   const Vec& rate) {
  return control_decoder(K, D, D_target) * rate;
}

double spike_cost(const Vec& x, const Vec& xhat, const Vec& rate, double nu,
                  double mu, double dt) {
  if (x.size() != xhat.size()) {
    throw config_error("state and estimate dimensions differ");
  }
  return dt * ((x - xhat).squaredNorm() + nu * rate.lpNorm<1>() +
               mu * rate.squaredNorm());
}

void silence_neurons(SpikingNetwork& net, const std::vector<bool>& mask) {
  if (static_cast<int>(mask.size()) != net.n_neurons()) {
    throw config_error("mask size must match the network");
  }
  int live = 0;
  for (int i = 0; i < net.n_neurons(); ++i) {
    if (!(net.silenced[i] || mask[i])) ++live;
  }
  if (live == 0) {
    throw config_error("silencing every neuron leaves no network");
  }
  for (int i = 0; i < net.n_neurons(); ++i) {
    if (mask[i]) {
      net.silenced[i] = 1;
      net.sigma[i] = 0.0;
    }
  }
}

}  // namespace spikereg
