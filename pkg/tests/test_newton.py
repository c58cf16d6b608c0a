import numpy as np
import pytest

from avint import newton_solve
from avint.errors import ConvergenceError, DivergenceError


def bisection_oracle(f, lo, hi, tol=1e-14):
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if flo * fm <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def test_linear_residual_converges_in_one_iteration():
    counters = {}
    z = newton_solve(lambda z: z - 3.0, jacobian=lambda z: np.eye(1),
                     guess=np.array([0.0]), counters=counters)
    assert z == pytest.approx([3.0])
    assert counters["iterations"] == 1
    # the finite-difference path needs at most one polishing iteration extra
    counters = {}
    z = newton_solve(lambda z: z - 3.0, guess=np.array([0.0]), counters=counters)
    assert z == pytest.approx([3.0])
    assert counters["iterations"] <= 2


def test_scalar_quadratic_matches_hand_iteration():
    counters = {}
    z = newton_solve(lambda z: z**2 - 4.0, guess=np.array([3.0]), tol=1e-12, counters=counters)
    assert z == pytest.approx([2.0], abs=1e-12)
    assert counters["iterations"] <= 6


def test_no_real_root_raises_convergence_failure():
    with pytest.raises(ConvergenceError) as err:
        newton_solve(lambda z: z**2 + 1.0, guess=np.array([1.0]))
    assert err.value.residual_norm is not None


def test_nonfinite_initial_residual_raises_divergence():
    with pytest.raises(DivergenceError):
        newton_solve(lambda z: z / 0.0, guess=np.array([1.0]))


def test_well_conditioned_quadratic_system_matches_bisection(rng):
    # decoupled quadratics z_i^2 = c_i with random positive c
    c = rng.uniform(0.5, 4.0, size=5)
    z = newton_solve(lambda z: z**2 - c, guess=np.ones(5), tol=1e-13)
    for i in range(5):
        root = bisection_oracle(lambda x: x * x - c[i], 0.0, 3.0)
        assert z[i] == pytest.approx(root, abs=1e-12)


def test_analytic_jacobian_path():
    A = np.array([[2.0, 1.0], [0.5, 3.0]])
    b = np.array([1.0, -2.0])
    z = newton_solve(lambda z: A @ z - b, jacobian=lambda z: A, guess=np.zeros(2))
    assert z == pytest.approx(np.linalg.solve(A, b), abs=1e-12)


def test_vectorized_batched_jacobian_matches_plain():
    def residual(v):
        v2 = np.atleast_2d(np.asarray(v, dtype=float))
        out = np.stack([v2[:, 0] ** 2 + v2[:, 1] - 3.0, v2[:, 0] * v2[:, 1] - 2.0], axis=1)
        return out[0] if np.asarray(v).ndim == 1 else out

    z_plain = newton_solve(residual, guess=np.array([1.5, 1.5]))
    z_batched = newton_solve(residual, guess=np.array([1.5, 1.5]), vectorized=True)
    assert z_plain == pytest.approx(z_batched, abs=1e-10)
    assert np.abs(residual(z_batched)).max() < 1e-12


def test_damping_rescues_overshooting_start():
    # steep tanh wall: the undamped Newton step massively overshoots
    z = newton_solve(lambda z: np.tanh(20.0 * z) + 0.5 * z, guess=np.array([2.0]), tol=1e-12)
    assert np.abs(z).max() < 1e-10


def test_max_iter_exhaustion_raises():
    with pytest.raises(ConvergenceError):
        newton_solve(lambda z: np.sign(z) * np.sqrt(np.abs(z)) + 1e-3, guess=np.array([1.0]),
                     max_iter=2)
