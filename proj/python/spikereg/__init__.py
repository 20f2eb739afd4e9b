"""Spiking-network estimation and control experiments.

Thin re-export of the compiled core. The C++ command line (`spikereg`)
remains the primary interface; this module exists for scripted analysis of
the same operations.
"""

from spikereg._core import (  # noqa: F401
    ConfigError,
    CwForm,
    CwParams,
    ExperimentConfig,
    Framework,
    InstabilityError,
    LqrDesign,
    LtiModel,
    RunResult,
    SilenceEvent,
    SpikeRecord,
    SpikeResolution,
    UncertaintySpec,
    WorkbenchForm,
    build_cw,
    build_workbench,
    control_decoder,
    decode_state,
    design_lqr,
    framework_from_string,
    innovation_covariance,
    kf_gain,
    kf_riccati_step,
    lqr_gain,
    mean_motion,
    msif_gain,
    pseudo_inverse,
    run_experiment,
    sample_decoder,
    saturate,
    scenario_defaults,
    solve_care,
    thresholds,
    to_string,
)

__all__ = [name for name in dir() if not name.startswith("_")]
