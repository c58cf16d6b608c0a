"""Quadrature rules on [0, 1] and the per-step integral operator."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

MAX_GAUSS_STAGES = 16
DEFAULT_REFERENCE_STAGES = 12


@dataclass(frozen=True)
class QuadratureRule:
    """Positive quadrature rule on the reference interval [0, 1].

    The weights sum to one, so the rule scaled by a step size integrates
    constants exactly; positivity makes the induced discrete bilinear form
    sign-preserving and a norm on polynomials of degree < #nodes.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ParameterError("nodes and weights must be 1d arrays of equal length")
        if nodes.size == 0:
            raise ParameterError("rule must have at least one node")
        if np.any(nodes < -1e-14) or np.any(nodes > 1 + 1e-14):
            raise ParameterError("nodes must lie in [0, 1]")
        if np.any(np.diff(nodes) <= 0):
            raise ParameterError("nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise ParameterError("weights must be positive (sign preservation)")
        if abs(weights.sum() - 1.0) > 1e-10:
            raise ParameterError("weights must sum to 1 so the scaled rule integrates constants")

    @property
    def stages(self):
        return self.nodes.size


def gauss_legendre_rule(s: int) -> QuadratureRule:
    """s-point Gauss-Legendre rule on [0, 1]; exact for polynomials of degree <= 2s-1."""
    if not isinstance(s, (int, np.integer)) or not 1 <= s <= MAX_GAUSS_STAGES:
        raise ParameterError(f"stage count must be an integer in [1, {MAX_GAUSS_STAGES}], got {s!r}")
    x, w = np.polynomial.legendre.leggauss(int(s))
    return QuadratureRule(nodes=(x + 1.0) / 2.0, weights=w / 2.0)


@dataclass(frozen=True)
class IntegralOperator:
    """Linear approximation of the integral over one timestep.

    Either an s-stage positive quadrature rule (collocation flavour) or the
    exact integral on polynomials, realised through ``reference_rule``.  The
    reference rule also evaluates all right-hand-side integrals of the
    auxiliary-variable projections.
    """

    kind: str  # "stage-quadrature" | "exact-on-polynomials"
    rule: QuadratureRule | None = None
    reference_rule: QuadratureRule = field(
        default_factory=lambda: gauss_legendre_rule(DEFAULT_REFERENCE_STAGES)
    )

    def __post_init__(self):
        if self.kind not in ("stage-quadrature", "exact-on-polynomials"):
            raise ParameterError(f"unknown operator kind {self.kind!r}")
        if self.kind == "stage-quadrature" and self.rule is None:
            raise ParameterError("stage-quadrature operator needs a rule")

    @staticmethod
    def stage(rule_or_stages, reference_stages: int = DEFAULT_REFERENCE_STAGES) -> "IntegralOperator":
        rule = rule_or_stages
        if isinstance(rule_or_stages, (int, np.integer)):
            rule = gauss_legendre_rule(int(rule_or_stages))
        return IntegralOperator(
            kind="stage-quadrature", rule=rule, reference_rule=gauss_legendre_rule(reference_stages)
        )

    @staticmethod
    def exact(reference_stages: int = DEFAULT_REFERENCE_STAGES) -> "IntegralOperator":
        return IntegralOperator(
            kind="exact-on-polynomials", rule=None, reference_rule=gauss_legendre_rule(reference_stages)
        )

    @property
    def is_collocation(self):
        return self.kind == "stage-quadrature"

    def test_rule(self, s: int) -> QuadratureRule:
        """Nodes carrying the degree-(s-1) test basis, with diagonal discrete Gram.

        For a stage rule these are its own nodes; for the exact integral the
        s-point Gauss nodes (their Lagrange basis is L2-orthogonal with the
        Gauss weights on the diagonal).
        """
        if self.kind == "stage-quadrature":
            if self.rule.stages != s:
                raise ParameterError(
                    f"stage rule has {self.rule.stages} nodes but the scheme uses s={s}; "
                    "supply a rule with exactly s nodes or use the exact operator"
                )
            return self.rule
        return gauss_legendre_rule(s)


def apply_integral(op: IntegralOperator, dt: float, integrand) -> float:
    """Apply the operator to a scalar function of reference time.

    Stage kind evaluates dt * sum_i b_i f(tau_i); the exact kind applies the
    reference rule instead.
    """
    rule = op.rule if op.kind == "stage-quadrature" else op.reference_rule
    values = np.asarray([integrand(tau) for tau in rule.nodes], dtype=float)
    return dt * float(rule.weights @ values)
