"""Data-driven stability certificates for constrained switching linear systems."""

__version__ = "0.1.0"

from .automaton import Automaton, count_words, entropy, walk_probability
from .baseline import cjsr_bracket, cjsr_lower, gamma_model
from .bounds import BoundVariant, Certificate, certify
from .estimator import ScenarioLyapunov
from .products import enumerate_products
from .sampling import ObservationSet, SamplingConfig, ingest, synthesize
from .scenario import ScenarioConfig, ScenarioSolution, solve
from .system import SystemSpec, load_system

__all__ = [
    "Automaton",
    "BoundVariant",
    "Certificate",
    "ObservationSet",
    "SamplingConfig",
    "ScenarioConfig",
    "ScenarioLyapunov",
    "ScenarioSolution",
    "SystemSpec",
    "certify",
    "cjsr_bracket",
    "cjsr_lower",
    "count_words",
    "entropy",
    "enumerate_products",
    "gamma_model",
    "ingest",
    "load_system",
    "solve",
    "synthesize",
    "walk_probability",
]
