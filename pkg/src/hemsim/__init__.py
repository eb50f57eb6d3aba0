"""hemsim: a discrete active-inference simulator for household energy management.

Two agents plan over rolling horizons by minimizing expected free energy: a
thermostat balancing comfort against HVAC energy, and a battery balancing
electricity cost against emissions under time-of-use tariffs. The thermostat
can learn the room's thermodynamics from scratch through Dirichlet count
updates.
"""
from . import domain, inference
from .config import ScenarioConfig, load_config, parse_config
from .environment import (
    Environment,
    GroundTruth,
    NoiseConfig,
    TimeStepRow,
    load_timeseries,
    make_initial_truth,
    observe,
    step_env,
)
from .orchestrator import Metrics, StepRecord, compute_metrics, run_simulation

__version__ = "0.1.0"

__all__ = [
    "Environment",
    "GroundTruth",
    "Metrics",
    "NoiseConfig",
    "ScenarioConfig",
    "StepRecord",
    "TimeStepRow",
    "compute_metrics",
    "domain",
    "inference",
    "load_config",
    "load_timeseries",
    "make_initial_truth",
    "observe",
    "parse_config",
    "run_simulation",
    "step_env",
    "__version__",
]
