#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spikereg/linear_dynamics.hpp"
#include "spikereg/regulator.hpp"
#include "spikereg/types.hpp"

namespace spikereg {

// Random linear decoders. D reads the state estimate out of the filtered
// rates, D_target reads the desired state. Entries are iid N(0, variance).
struct DecoderPair {
  Mat D;         // n_x * N
  Mat D_target;  // n_x * N
  double variance = 0.0;
  double target_variance = 0.0;
};

// Spikes emitted during one step, with multiplicity, in firing order.
struct SpikeRecord {
  std::int64_t step = 0;
  std::vector<int> neurons;
};

// How threshold crossings inside one step turn into spikes.
//   greedy: fire one neuron at a time (largest margin first), letting the
//     fast weights inhibit the rest before they are re-examined. Settles at
//     a local optimum of the coding cost; firing is sparse and quiescent
//     between steps.
//   batch: every neuron above threshold fires once, simultaneously — the
//     plain Euler treatment, where crossings within one dt are not ordered —
//     and the cohort's fast weights land afterwards. Overlapping neurons
//     therefore overcorrect together; the knock-on crossings are then
//     settled greedily so the step still ends quiescent. Shared drive makes
//     whole subpopulations fire at once, which greedy firing suppresses.
enum class SpikeResolution { greedy, batch };

std::string to_string(SpikeResolution r);
SpikeResolution spike_resolution_from_string(const std::string& name);

// Recurrent integrate-and-fire network that carries both the state estimate
// and the feedback control in its spike code. Weight names follow their
// role; all are dense N*N unless noted.
struct SpikingNetwork {
  Mat D;         // estimate decoder, n_x * N
  Mat D_target;  // desired-state decoder, n_x * N

  double lambda = 0.0;   // rate leak (1/s)
  double mu = 0.0;       // quadratic rate penalty
  double nu = 0.0;       // linear rate penalty
  double eta_std = 0.0;  // membrane noise intensity

  SpikeResolution resolution = SpikeResolution::greedy;

  Vec threshold;  // per neuron, (||D_i||^2 + nu lambda + mu lambda^2) / 2

  Mat F_in;               // D^T B, input weights of the open-loop form
  Mat Omega_slow;         // D^T (A + lambda I) D, design-model recurrence
  Mat Omega_fast;         // -(D^T D + mu lambda^2 I), spike feedback
  Mat Omega_ctrl;         // -D^T B K D, control coupling to the estimate
  Mat Omega_ctrl_target;  // +D^T B K D_target, control coupling to target
  Mat Omega_fast_target;  // -(D_target^T D_target + mu lambda^2 I)
  Mat Omega_meas;         // -D^T G C D, refreshed every step
  Mat F_meas;             // D^T G, refreshed every step

  Vec sigma;  // membrane potentials
  Vec rate;   // filtered rates, nonnegative

  std::vector<char> silenced;  // permanently muted neurons
  std::int64_t step_count = 0;

  int n_neurons() const { return static_cast<int>(D.cols()); }
  int n_states() const { return static_cast<int>(D.rows()); }
};

// Samples an n_x * N decoder with iid N(0, variance) entries. Columns with
// ||D_i|| < 1e-12 are resampled so every neuron stays expressive.
Mat sample_decoder(int n_states, int n_neurons, double variance,
                   std::mt19937_64& gen);

// T_i = (||D_i||^2 + nu lambda + mu lambda^2) / 2, strictly positive.
Vec thresholds(const Mat& D, double nu, double mu, double lambda);

// Fills the static weights from the design model and the regulator gain.
void synthesize_static_weights(SpikingNetwork& net, const LtiModel& design,
                               const Mat& K);

// Refreshes the measurement pathway from the innovation covariance:
//   G = C^+ diag(sat(diag(P_zz) / delta))
//   F_meas = D^T G,  Omega_meas = -F_meas C D
void update_adaptive_weights(SpikingNetwork& net, const Mat& P_zz,
                             const Mat& C, double delta);

// Builds a network whose membrane starts at the projection of the initial
// estimate (and initial desired state). The rates are warm-started by
// running the exact firing rule on that projection once, so the decoded
// estimate begins at the initial estimate (to within decoder quanta)
// rather than at zero; the membrane keeps the sub-threshold residual.
SpikingNetwork build_network(const LtiModel& design, const Mat& K,
                             const DecoderPair& dec, double lambda, double mu,
                             double nu, double eta_std, const Vec& xhat0,
                             const DesiredState& desired0);

// Greedy resolution of threshold crossings: repeatedly fires the neuron
// with the largest margin sigma_i - T_i (lowest index on ties), applying
// the fast weights and incrementing its rate immediately. Stops when every
// live neuron is at or below threshold. Throws instability_error after
// 10 * N firings in one call.
std::vector<int> resolve_spikes(SpikingNetwork& net);

// Batch resolution: one synchronous pass in which every live neuron above
// threshold fires once (reported in index order) and the whole cohort's
// fast weights are applied at once, followed by a greedy settling pass for
// the crossings the cohort overshoot creates. Ends with every live neuron
// at or below threshold; the greedy pass shares the 10 * N firing budget.
std::vector<int> resolve_spikes_batch(SpikingNetwork& net);

// One network step: Euler drift of the membrane (including N(0,
// eta_std^2 dt) noise when eta_std > 0), rate decay by (1 - lambda dt),
// then spike resolution per net.resolution. Silenced neurons are clamped
// to sigma = 0 and never fire. Returns the spikes fired this step.
std::vector<int> network_step(SpikingNetwork& net, const Vec& z,
                              const DesiredState& desired, double dt,
                              std::mt19937_64& gen);

// xhat = D r
Vec decode_state(const Mat& D, const Vec& rate);

// Readout matrix -K (D - D_target); u = control_decoder(...) * rate.
Mat control_decoder(const Mat& K, const Mat& D, const Mat& D_target);

Vec decode_control(const Mat& K, const Mat& D, const Mat& D_target,
                   const Vec& rate);

// Instantaneous coding cost dt (||x - xhat||^2 + nu ||r||_1 + mu ||r||_2^2).
double spike_cost(const Vec& x, const Vec& xhat, const Vec& rate, double nu,
                  double mu, double dt);

// Permanently silences the masked neurons: sigma clamped to 0, no further
// spikes, rates keep decaying. Throws config_error if every neuron would be
// silenced.
void silence_neurons(SpikingNetwork& net, const std::vector<bool>& mask);

}  // namespace spikereg
