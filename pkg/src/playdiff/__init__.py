"""Play and stop hysteresis operators with Newton and Bouligand derivatives.

All operators act exactly on continuous piecewise-linear signals.
"""
from .accmax import accumulated_max, good_set, maximizer_path, newton_apply, pointwise_dir_derivative
from .errors import (
    DecompositionError,
    DomainError,
    ParameterError,
    PlayDiffError,
    SignalFormatError,
    SolverError,
    StaleDecompositionError,
)
from .intervals import IntervalSet
from .kernels import BACKEND
from .maxfun import DiracMeasure, SelectionRule, argmax_set, counterexample_w11, max_value
from .playstop import (
    Decomposition,
    DerivativeAction,
    PlayConfig,
    local_partition,
    memory_trace,
    play,
    play_dir_derivative,
    play_newton,
    stop,
)
from .signal import NormSpec, PlSignal, StepLinSignal, TimeGrid
from .solver import PlayEquation, semismooth_newton

__version__ = "0.1.0"
