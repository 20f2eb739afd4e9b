// Python bindings for the core operations: plant builders, regulator and
// filter design, decoder/network utilities, and the closed-loop harness.
// Matrices cross the boundary as numpy arrays via Eigen.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spikereg/config.hpp"
#include "spikereg/errors.hpp"
#include "spikereg/filters.hpp"
#include "spikereg/harness.hpp"
#include "spikereg/linear_dynamics.hpp"
#include "spikereg/regulator.hpp"
#include "spikereg/rng.hpp"
#include "spikereg/spiking.hpp"

namespace py = pybind11;
using namespace spikereg;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spiking-network estimation and control experiments";

  py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<instability_error>(m, "InstabilityError",
                                            PyExc_RuntimeError);

  // ----- plants ------------------------------------------------------------
  py::class_<LtiModel>(m, "LtiModel")
      .def(py::init<>())
      .def_readwrite("A", &LtiModel::A)
      .def_readwrite("B", &LtiModel::B)
      .def_readwrite("C", &LtiModel::C)
      .def_readwrite("Q", &LtiModel::Q)
      .def_readwrite("R", &LtiModel::R)
      .def_readwrite("dt", &LtiModel::dt)
      .def_property_readonly("n_states", &LtiModel::n_states)
      .def_property_readonly("n_inputs", &LtiModel::n_inputs)
      .def_property_readonly("n_outputs", &LtiModel::n_outputs);

  py::enum_<WorkbenchForm>(m, "WorkbenchForm")
      .value("double_integrator", WorkbenchForm::double_integrator)
      .value("decoupled", WorkbenchForm::decoupled);
  py::enum_<CwForm>(m, "CwForm")
      .value("velocity_coupled", CwForm::velocity_coupled)
      .value("classic", CwForm::classic);

  py::class_<CwParams>(m, "CwParams")
      .def(py::init<>())
      .def_readwrite("mu_earth", &CwParams::mu_earth)
      .def_readwrite("orbit_radius", &CwParams::orbit_radius);

  m.def("build_workbench", &build_workbench,
        py::arg("form") = WorkbenchForm::double_integrator);
  m.def("mean_motion", &mean_motion, py::arg("params") = CwParams{});
  m.def("build_cw", &build_cw, py::arg("n"), py::arg("dt"), py::arg("Q"),
        py::arg("R"), py::arg("form") = CwForm::velocity_coupled);

  // ----- regulator ----------------------------------------------------------
  py::class_<LqrDesign>(m, "LqrDesign")
      .def_readonly("S", &LqrDesign::S)
      .def_readonly("K", &LqrDesign::K);
  m.def("solve_care", &solve_care, py::arg("A"), py::arg("B"), py::arg("Q"),
        py::arg("R"));
  m.def("lqr_gain", &lqr_gain, py::arg("S"), py::arg("B"), py::arg("R"));
  m.def("design_lqr", &design_lqr, py::arg("A"), py::arg("B"), py::arg("Q"),
        py::arg("R"));

  // ----- filters ------------------------------------------------------------
  m.def("kf_riccati_step", &kf_riccati_step, py::arg("P"), py::arg("model"),
        py::arg("dt"));
  m.def("innovation_covariance", &innovation_covariance, py::arg("P"),
        py::arg("C"), py::arg("R"));
  m.def("kf_gain", &kf_gain, py::arg("P"), py::arg("C"), py::arg("R"));
  m.def("msif_gain", &msif_gain, py::arg("P_zz"), py::arg("C"),
        py::arg("delta"));
  m.def("saturate", &saturate, py::arg("v"));
  m.def("pseudo_inverse", &pseudo_inverse, py::arg("M"));

  // ----- spiking pieces -----------------------------------------------------
  m.def(
      "sample_decoder",
      [](int n_states, int n_neurons, double variance, std::uint64_t seed) {
        auto gen = make_stream(seed, noise_stream::decoder);
        return sample_decoder(n_states, n_neurons, variance, gen);
      },
      py::arg("n_states"), py::arg("n_neurons"), py::arg("variance"),
      py::arg("seed"));
  m.def("thresholds", &thresholds, py::arg("D"), py::arg("nu"), py::arg("mu"),
        py::arg("lambda_"));
  m.def("decode_state", &decode_state, py::arg("D"), py::arg("rate"));
  m.def("control_decoder", &control_decoder, py::arg("K"), py::arg("D"),
        py::arg("D_target"));

  py::enum_<SpikeResolution>(m, "SpikeResolution")
      .value("greedy", SpikeResolution::greedy)
      .value("batch", SpikeResolution::batch);

  // ----- harness ------------------------------------------------------------
  py::enum_<Framework>(m, "Framework")
      .value("lqg", Framework::lqg)
      .value("lqr_msif", Framework::lqr_msif)
      .value("snn_lqr_msif", Framework::snn_lqr_msif);

  py::class_<SilenceEvent>(m, "SilenceEvent")
      .def(py::init<>())
      .def_readwrite("time", &SilenceEvent::time)
      .def_readwrite("fraction", &SilenceEvent::fraction);

  py::class_<UncertaintySpec>(m, "UncertaintySpec")
      .def(py::init<>())
      .def_readwrite("model_scale", &UncertaintySpec::model_scale)
      .def_readwrite("outlier_times", &UncertaintySpec::outlier_times)
      .def_readwrite("outlier_scale", &UncertaintySpec::outlier_scale)
      .def_readwrite("silence_schedule", &UncertaintySpec::silence_schedule);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("scenario", &ExperimentConfig::scenario)
      .def_readwrite("framework", &ExperimentConfig::framework)
      .def_readwrite("duration", &ExperimentConfig::duration)
      .def_readwrite("dt", &ExperimentConfig::dt)
      .def_readwrite("n_neurons", &ExperimentConfig::n_neurons)
      .def_readwrite("lambda_", &ExperimentConfig::lambda)
      .def_readwrite("mu", &ExperimentConfig::mu)
      .def_readwrite("nu", &ExperimentConfig::nu)
      .def_readwrite("delta", &ExperimentConfig::delta)
      .def_readwrite("eta_std", &ExperimentConfig::eta_std)
      .def_readwrite("decoder_variance", &ExperimentConfig::decoder_variance)
      .def_readwrite("target_decoder_variance",
                     &ExperimentConfig::target_decoder_variance)
      .def_readwrite("spike_resolution", &ExperimentConfig::spike_resolution)
      .def_readwrite("noise", &ExperimentConfig::noise)
      .def_readwrite("p0_scale", &ExperimentConfig::p0_scale)
      .def_readwrite("seeds", &ExperimentConfig::seeds)
      .def_readwrite("uncertainty", &ExperimentConfig::uncertainty)
      .def_readwrite("metrics_window", &ExperimentConfig::metrics_window)
      .def_readwrite("error_tail_start", &ExperimentConfig::error_tail_start)
      .def_readwrite("workbench_form", &ExperimentConfig::workbench_form)
      .def_readwrite("cw_form", &ExperimentConfig::cw_form)
      .def_readwrite("cw_params", &ExperimentConfig::cw_params);

  m.def("scenario_defaults", &scenario_defaults, py::arg("scenario"));

  py::class_<SpikeRecord>(m, "SpikeRecord")
      .def_readonly("step", &SpikeRecord::step)
      .def_readonly("neurons", &SpikeRecord::neurons);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("t", &RunResult::t)
      .def_readonly("x", &RunResult::x)
      .def_readonly("xhat", &RunResult::xhat)
      .def_readonly("u", &RunResult::u)
      .def_readonly("z", &RunResult::z)
      .def_readonly("p_diag", &RunResult::p_diag)
      .def_readonly("raster", &RunResult::raster)
      .def_readonly("tail_error", &RunResult::tail_error)
      .def_readonly("spike_fraction_pct", &RunResult::spike_fraction_pct)
      .def_readonly("active_pct", &RunResult::active_pct)
      .def_readonly("cost_control", &RunResult::cost_control)
      .def_readonly("cost_spike", &RunResult::cost_spike)
      .def_readonly("master_seed", &RunResult::master_seed);

  m.def("run_experiment", &run_experiment, py::arg("config"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
  m.def("to_string", py::overload_cast<Framework>(&to_string),
        py::arg("framework"));
  m.def("framework_from_string", &framework_from_string, py::arg("name"));
}
