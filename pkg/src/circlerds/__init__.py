"""Random dynamics of circle diffeomorphisms: attracting points, stationary
measures, Lyapunov exponents, Furstenberg entropy and dimension."""
from .circle import Arc, CirclePoint, dist, wrap
from .engine import (GENERATOR_ID, NuMeasure, OmegaStream, backward_apply, forward_apply,
                     inverse_measure, reversed_apply, stream_key)
from .errors import (CircleRDSError, ConfigError, DegenerateBall, DegenerateGap,
                     HypothesisViolation, NonConvergence)
from .kernels import BACKEND
from .maps import InverseMap, Projective, Rotation, SineDiffeo
from .parallel import set_threads

__version__ = "0.1.0"

__all__ = [
    "Arc", "BACKEND", "CirclePoint", "CircleRDSError", "ConfigError", "DegenerateBall",
    "DegenerateGap", "GENERATOR_ID", "HypothesisViolation", "InverseMap", "NonConvergence",
    "NuMeasure", "OmegaStream", "Projective", "Rotation", "SineDiffeo", "__version__",
    "backward_apply", "dist", "forward_apply", "inverse_measure", "reversed_apply",
    "set_threads", "stream_key", "wrap",
]
