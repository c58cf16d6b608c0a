from .config import ExperimentConfig, load_config
from .runner import run
from .convergence import convergence_study

__all__ = ["ExperimentConfig", "load_config", "run", "convergence_study"]
