"""Learning thresholds and half-spaces from contrastive example pairs."""

from .geometry import Halfspace, Threshold
from .learners import LEARNERS, LearnerOutput, build_learner
from .noise import ExponentialNoise, LinearNoise, PolynomialNoise, ScaledNoise, TabulatedNoise, ZeroNoise, stop_count
from .oracles import ContrastiveOracle, DetAMDM, ExamplePair, MinDistance, ProbAMDM

__all__ = [
    "ContrastiveOracle",
    "DetAMDM",
    "ExamplePair",
    "ExponentialNoise",
    "Halfspace",
    "LEARNERS",
    "LearnerOutput",
    "LinearNoise",
    "MinDistance",
    "PolynomialNoise",
    "ProbAMDM",
    "ScaledNoise",
    "TabulatedNoise",
    "Threshold",
    "ZeroNoise",
    "build_learner",
    "stop_count",
]
__version__ = "0.1.0"
