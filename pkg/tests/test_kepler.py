import numpy as np
import pytest

from avint.errors import DegeneracyError, SingularityError
from avint.problems import kepler


def central_difference(fn, x, h=1e-6):
    return np.array([(fn(x + h * e) - fn(x - h * e)) / (2 * h) for e in np.eye(x.size)])


def test_invariants_at_standard_ic():
    H, L, A = kepler.kepler_invariants(kepler.STANDARD_IC)
    assert H == pytest.approx(-0.5, abs=1e-14)
    assert L == pytest.approx(0.8, abs=1e-14)
    assert A == pytest.approx([0.6, 0.0], abs=1e-14)


def test_eccentricity_identity():
    H, L, A = kepler.kepler_invariants(kepler.STANDARD_IC)
    assert A @ A - (1.0 + 2.0 * H * L**2) == pytest.approx(0.0, abs=1e-14)


def test_circular_orbit_has_zero_eccentricity():
    state = np.array([1.0, 0.0, 0.0, 1.0])
    H, L, A = kepler.kepler_invariants(state)
    assert H == pytest.approx(-0.5)
    assert L == pytest.approx(1.0)
    assert A == pytest.approx([0.0, 0.0], abs=1e-14)


def test_origin_is_singular():
    with pytest.raises(SingularityError):
        kepler.kepler_invariants(np.array([0.0, 0.0, 1.0, 1.0]))


@pytest.mark.parametrize("grad,component", [
    (kepler.grad_H, lambda s: kepler.kepler_invariants(s)[0]),
    (kepler.grad_A1, lambda s: kepler.kepler_invariants(s)[2][0]),
    (kepler.grad_A2, lambda s: kepler.kepler_invariants(s)[2][1]),
])
def test_analytic_gradients_match_finite_differences(grad, component, rng):
    for _ in range(5):
        state = rng.uniform(-2.0, 2.0, 4)
        if np.linalg.norm(state[:2]) < 0.3:
            state[:2] += 1.0
        fd = central_difference(component, state)
        scale = max(1.0, np.abs(fd).max())
        assert np.abs(fd - grad(state)).max() / scale < 1e-6


def test_gradients_are_orthogonal_to_the_field(rng):
    for _ in range(50):
        state = rng.uniform(-2.0, 2.0, 4)
        if np.linalg.norm(state[:2]) < 0.3:
            state[:2] += 1.0
        f = kepler.rhs(state)
        for g in (kepler.grad_H(state), kepler.grad_A1(state), kepler.grad_A2(state)):
            assert abs(g @ f) < 1e-9 * max(1.0, np.linalg.norm(g) * np.linalg.norm(f))


def test_form_coincidence_on_gradient_tuple(rng):
    state = kepler.STANDARD_IC
    form = kepler.kepler_form(state)
    grads = [kepler.grad_H(state), kepler.grad_A1(state), kepler.grad_A2(state)]
    f = kepler.rhs(state)
    for _ in range(50):
        y = rng.standard_normal(4)
        expected = y @ f
        assert form(*grads, y) == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_form_repeated_argument_and_sign(rng):
    form = kepler.kepler_form(kepler.STANDARD_IC)
    a, b, c = rng.standard_normal((3, 4))
    assert form(a, b, a, c) == pytest.approx(0.0, abs=1e-12)
    assert form(b, a, c, a) == pytest.approx(-form(a, b, c, a), rel=1e-10, abs=1e-12)


def test_form_degeneracy_guard():
    # radial orbit: L = 0 makes the prefactor vanish
    state = np.array([1.0, 0.0, 0.5, 0.0])
    with pytest.raises(DegeneracyError):
        kepler.kepler_form(state)


def test_fast_rhs_path_matches_pointwise_form(rng):
    from avint.forms import functional_vector

    state = kepler.STANDARD_IC
    ws = [rng.standard_normal(4) for _ in range(3)]
    fast = kepler.form_rhs(state, ws)
    slow = functional_vector(kepler.kepler_form(state), ws)
    assert fast == pytest.approx(slow, abs=1e-13)


def test_state_dataclass_round_trip():
    st = kepler.KeplerState(x=np.array([0.4, 0.0]), v=np.array([0.0, 2.0]))
    assert st.array == pytest.approx(kepler.STANDARD_IC)


def test_form_coincidence_at_100_random_states(rng):
    worst = 0.0
    checked = 0
    while checked < 100:
        state = rng.uniform(-2.0, 2.0, 4)
        if np.linalg.norm(state[:2]) < 0.3:
            continue
        H, L, _ = kepler.kepler_invariants(state)
        if abs(2.0 * L * H) < 1e-3:  # stay off the degenerate set
            continue
        form = kepler.kepler_form(state)
        grads = [kepler.grad_H(state), kepler.grad_A1(state), kepler.grad_A2(state)]
        f = kepler.rhs(state)
        y = rng.standard_normal(4)
        expected = y @ f
        worst = max(worst, abs(form(*grads, y) - expected) / max(1.0, abs(expected)))
        checked += 1
    assert worst <= 1e-9
