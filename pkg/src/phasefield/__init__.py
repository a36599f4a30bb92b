"""Phase-field approximation of (forced, volume-preserving) mean curvature flow.

Allen-Cahn type equations on the periodic unit box, integrated with an exact
Fourier heat step followed by an explicit reaction step.
"""
from .errors import ConfigError, DegenerateFieldError, ProfileSolveError
from .field import Circle, GridSpec, ScalarField, Torus, UnionOfCircles, init_phase_field, integrate
from .potential import CW, DOUBLE_WELL, PotentialModel
from .reaction import ForcingSpec, ReactionForm, eval_reaction, multiplier_values
from .stepper import SimConfig, SimState, run, step
from .observables import Observation, ObservationRecorder, measure
from .experiments import ExperimentSpec, ConvergenceReport, default_spec, run_experiment

__all__ = [
    "ConfigError", "DegenerateFieldError", "ProfileSolveError",
    "Circle", "GridSpec", "ScalarField", "Torus", "UnionOfCircles", "init_phase_field", "integrate",
    "CW", "DOUBLE_WELL", "PotentialModel",
    "ForcingSpec", "ReactionForm", "eval_reaction", "multiplier_values",
    "SimConfig", "SimState", "run", "step",
    "Observation", "ObservationRecorder", "measure",
    "ExperimentSpec", "ConvergenceReport", "default_spec", "run_experiment",
]
