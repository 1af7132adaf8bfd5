"""Monte Carlo simulation of EPR photon-pair experiments in a local hidden-variable model."""

from .analysis import ChshResult, chsh, correlation_E, shape_fit, visibility
from .engine import CoincidenceTally, CorrelationCurve, RunConfig, efficiency_gate, run_setting, sweep
from .errors import ConfigError, ConfigParseError, DegenerateFitError, EmptyTallyError
from .model import DetectorSettings, PairState, SwitchOutcome, emit_pair, measure
from .oracle import analog_integral, digital_distribution, oracle_chsh, oracle_E
from .rng import substream

__all__ = [
    "ChshResult", "CoincidenceTally", "ConfigError", "ConfigParseError", "CorrelationCurve",
    "DegenerateFitError", "DetectorSettings", "EmptyTallyError", "PairState", "RunConfig",
    "SwitchOutcome", "analog_integral", "chsh", "correlation_E", "digital_distribution",
    "efficiency_gate", "emit_pair", "measure", "oracle_E", "oracle_chsh", "run_setting",
    "shape_fit", "substream", "sweep", "visibility",
]
