import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avint import IntegralOperator, gauss_legendre_rule, project_auxiliary
from avint.timepoly import StageSpace


def test_projection_of_quadratic_onto_constants():
    # solve the 1x1 system b1 w = int tau^2 by hand: w = 1/3
    op = IntegralOperator.stage(1)
    w = project_auxiliary(op, 1.0, lambda t: np.array([t * t]))
    assert w.coefficients[0, 0] == pytest.approx(1.0 / 3.0, abs=1e-14)


def test_projection_exact_operator_matches_l2_mean():
    op = IntegralOperator.exact()
    w = project_auxiliary(op, 1.0, lambda t: np.array([t * t]), stages=1)
    assert w.coefficients[0, 0] == pytest.approx(1.0 / 3.0, abs=1e-14)


@pytest.mark.parametrize("s", [1, 2, 3, 4])
def test_projection_is_identity_on_the_test_space(s):
    rng = np.random.default_rng(s)
    coeff = rng.standard_normal((s, 2))

    def g(tau):
        return sum(coeff[k] * tau**k for k in range(s))

    op = IntegralOperator.stage(s)
    w = project_auxiliary(op, 0.37, g)
    taus = np.linspace(0.0, 1.0, 11)
    values = w.at_reference(taus)
    expected = np.stack([g(t) for t in taus])
    assert np.abs(values - expected).max() < 1e-13


@pytest.mark.parametrize("s", [1, 2, 3])
def test_projection_idempotence(s):
    op = IntegralOperator.stage(s)
    g = lambda tau: np.array([np.sin(3.0 * tau), np.exp(tau)])
    w = project_auxiliary(op, 0.2, g)
    w2 = project_auxiliary(op, 0.2, lambda tau: w.at_reference([tau])[0])
    assert np.abs(w.coefficients - w2.coefficients).max() < 1e-13


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=4), st.integers(min_value=0, max_value=60))
def test_discrete_riesz_identity(s, seed):
    """I_n[w^T y] equals the reference integral of g^T y for test-space y."""
    rng = np.random.default_rng(seed)
    op = IntegralOperator.stage(s)
    sp = StageSpace(s, op)
    g = lambda tau: np.array([np.cos(2.0 * tau), tau**3 - 0.5])
    w = project_auxiliary(op, 1.0, g)
    ycoef = rng.standard_normal((s, 2))

    def y(tau):
        return sum(ycoef[k] * tau**k for k in range(s))

    lhs = sum(b * w.at_reference([tau])[0] @ y(tau)
              for tau, b in zip(sp.test_nodes, sp.test_weights))
    rhs = sum(B * g(rho) @ y(rho) for rho, B in zip(sp.ref_nodes, sp.ref_weights))
    scale = max(1.0, abs(rhs))
    assert abs(lhs - rhs) <= 1e-12 * scale


def test_trial_polynomial_reconstruction():
    op = IntegralOperator.stage(2)
    sp = StageSpace(2, op)
    coeffs = np.array([[1.0, 0.0], [0.5, 2.0], [0.25, -1.0]])
    p = sp.trial_polynomial((3.0, 3.5), coeffs)
    assert p.initial_value == pytest.approx([1.0, 0.0])
    assert p(3.0) == pytest.approx([1.0, 0.0])
    # derivative of the interpolant: check against finite differences
    t = 3.2
    h = 1e-6
    fd = (p(t + h) - p(t - h)) / (2 * h)
    assert p.derivative(t) == pytest.approx(fd, abs=1e-7)


def test_gram_diagonality_of_test_basis_under_exact_integral():
    # Lagrange basis at the s Gauss nodes is L2-orthogonal with the Gauss weights
    s = 3
    rule = gauss_legendre_rule(s)
    ref = gauss_legendre_rule(12)
    from avint.lagrange import eval_matrix

    E = eval_matrix(rule.nodes, ref.nodes)
    gram = (E * ref.weights[:, None]).T @ E
    assert np.abs(gram - np.diag(rule.weights)).max() < 1e-14
