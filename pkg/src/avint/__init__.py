"""Structure-preserving time integrators built on auxiliary-variable projections.

Arbitrary-order implicit schemes that conserve every known invariant of a
conservative ODE, energy-conserving / entropy-dissipating schemes for systems
with coupled reversible-irreversible structure (ODE and 1D PDE), and an
experiment harness with classical baselines for comparison.
"""

from .conservative import (
    ConservativeSystem,
    Invariant,
    PoissonSystem,
    TrajectoryResult,
    run_trajectory,
    step_conservative,
    step_gauss,
    step_implicit_midpoint,
    step_mean_value_dg,
    step_poisson_conservative,
)
from .forms import (
    AlternatingFormEvaluator,
    MultilinearFormEvaluator,
    alternatise,
    constructive_F,
    dual_basis,
    functional_vector,
)
from .generic import DegeneracyReport, GenericOdeSystem, check_degeneracy, step_generic
from .newton import newton_solve
from .quadrature import IntegralOperator, QuadratureRule, apply_integral, gauss_legendre_rule
from .timepoly import StageSpace, TestPolynomial, TimestepPolynomial, project_auxiliary

__all__ = [
    "AlternatingFormEvaluator",
    "ConservativeSystem",
    "DegeneracyReport",
    "GenericOdeSystem",
    "IntegralOperator",
    "Invariant",
    "MultilinearFormEvaluator",
    "PoissonSystem",
    "QuadratureRule",
    "StageSpace",
    "TestPolynomial",
    "TimestepPolynomial",
    "TrajectoryResult",
    "alternatise",
    "apply_integral",
    "check_degeneracy",
    "constructive_F",
    "dual_basis",
    "functional_vector",
    "gauss_legendre_rule",
    "newton_solve",
    "project_auxiliary",
    "run_trajectory",
    "step_conservative",
    "step_gauss",
    "step_generic",
    "step_implicit_midpoint",
    "step_mean_value_dg",
    "step_poisson_conservative",
]

__version__ = "0.1.0"
