"""Polynomial trial/test spaces on one timestep and the auxiliary projection."""

from dataclasses import dataclass

import numpy as np

from . import lagrange
from .errors import ParameterError
from .quadrature import IntegralOperator


@dataclass(frozen=True)
class TimestepPolynomial:
    """Degree-s vector polynomial on [t_n, t_n+1] in a nodal basis.

    ``nodes`` are reference-time nodes in [0, 1] (the first one is 0, pinning
    the initial value); ``coefficients`` has shape (s+1, dim) with one row of
    nodal values per node.
    """

    degree: int
    dim: int
    interval: tuple
    nodes: np.ndarray
    coefficients: np.ndarray

    def _tau(self, t):
        t0, t1 = self.interval
        return (np.asarray(t, dtype=float) - t0) / (t1 - t0)

    def __call__(self, t):
        E = lagrange.eval_matrix(self.nodes, self._tau(t))
        out = E @ self.coefficients
        return out[0] if np.isscalar(t) else out

    def derivative(self, t):
        """Time derivative (degree s-1), in physical time units."""
        t0, t1 = self.interval
        D = lagrange.deriv_eval_matrix(self.nodes, self._tau(t)) / (t1 - t0)
        out = D @ self.coefficients
        return out[0] if np.isscalar(t) else out

    @property
    def initial_value(self):
        return self.coefficients[0]

    @property
    def end_value(self):
        E = lagrange.eval_matrix(self.nodes, [1.0])
        return (E @ self.coefficients)[0]


@dataclass(frozen=True)
class TestPolynomial:
    """Degree-(s-1) vector polynomial on a timestep (the test / auxiliary space)."""

    degree: int
    dim: int
    interval: tuple
    nodes: np.ndarray
    coefficients: np.ndarray

    def _tau(self, t):
        t0, t1 = self.interval
        return (np.asarray(t, dtype=float) - t0) / (t1 - t0)

    def __call__(self, t):
        E = lagrange.eval_matrix(self.nodes, self._tau(t))
        out = E @ self.coefficients
        return out[0] if np.isscalar(t) else out

    def at_reference(self, tau):
        E = lagrange.eval_matrix(self.nodes, np.atleast_1d(tau))
        return E @ self.coefficients


class StageSpace:
    """Precomputed Lagrange matrices for one (stages, operator) pair.

    Everything lives on the reference interval [0, 1]:

    - trial basis on {0} + test nodes (degree s, initial value = first coeff),
    - test basis on the test nodes (degree s-1, diagonal discrete Gram),
    - reference-rule nodes used for every right-hand-side integral.
    """

    def __init__(self, s: int, op: IntegralOperator):
        if s < 1:
            raise ParameterError("stage count must be >= 1")
        self.s = s
        self.op = op
        test = op.test_rule(s)
        self.test_nodes = test.nodes
        self.test_weights = test.weights
        self.trial_nodes = np.concatenate([[0.0], test.nodes])
        ref = op.reference_rule
        self.ref_nodes = ref.nodes
        self.ref_weights = ref.weights
        self.collocation = op.is_collocation

        # trial-basis values/derivatives at the reference nodes and test nodes
        self.eval_ref = lagrange.eval_matrix(self.trial_nodes, self.ref_nodes)       # (nq, s+1)
        self.deriv_ref = lagrange.deriv_eval_matrix(self.trial_nodes, self.ref_nodes)
        self.deriv_stage = lagrange.deriv_eval_matrix(self.trial_nodes, self.test_nodes)  # (s, s+1)
        self.end_eval = lagrange.eval_matrix(self.trial_nodes, [1.0])[0]             # (s+1,)

        # test-basis values at the reference nodes
        self.test_eval_ref = lagrange.eval_matrix(self.test_nodes, self.ref_nodes)   # (nq, s)
        # projection onto the test space: w(tau_i) = (1/b_i) sum_q B_q g(rho_q) l_i(rho_q)
        self.projection = (self.test_eval_ref * self.ref_weights[:, None]).T / self.test_weights[:, None]
        # residual weighting for the exact operator: rows B_q l_i(rho_q)
        self.test_ref_weighted = (self.test_eval_ref * self.ref_weights[:, None]).T  # (s, nq)

    def trial_polynomial(self, interval, coefficients) -> TimestepPolynomial:
        return TimestepPolynomial(
            degree=self.s,
            dim=coefficients.shape[1],
            interval=tuple(interval),
            nodes=self.trial_nodes,
            coefficients=np.asarray(coefficients, dtype=float),
        )

    def test_polynomial(self, interval, coefficients) -> TestPolynomial:
        return TestPolynomial(
            degree=self.s - 1,
            dim=coefficients.shape[1] if coefficients.ndim > 1 else 1,
            interval=tuple(interval),
            nodes=self.test_nodes,
            coefficients=np.asarray(coefficients, dtype=float),
        )


def project_auxiliary(op: IntegralOperator, dt: float, target, stages: int | None = None,
                      interval: tuple = (0.0, 1.0)) -> TestPolynomial:
    """Project a vector function of reference time onto the test space.

    Returns the unique degree-(s-1) polynomial w with I_n[w^T y] equal to the
    reference-rule integral of target^T y for every test polynomial y.  With
    the nodal test basis the discrete Gram is diagonal, so the stage values
    are explicit; the result does not depend on dt (both sides scale with it).
    """
    if stages is None:
        if op.kind != "stage-quadrature":
            raise ParameterError("the exact operator needs an explicit stage count")
        stages = op.rule.stages
    if dt <= 0:
        raise ParameterError("dt must be positive")
    sp = StageSpace(stages, op)
    g = np.asarray([np.atleast_1d(np.asarray(target(tau), dtype=float)) for tau in sp.ref_nodes])
    coeffs = sp.projection @ g
    return sp.test_polynomial(interval, coeffs)
