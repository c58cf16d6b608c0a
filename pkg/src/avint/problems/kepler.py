"""Planar two-body problem in nondimensional form.

State layout: (x1, x2, v1, v2).  The three functionally independent conserved
quantities used by the integrator are the energy H and both components of the
eccentricity (Runge-Lenz) vector A; the scalar angular momentum L follows from
|A|^2 = 1 + 2 H L^2.
"""

from dataclasses import dataclass

import numpy as np

from ..conservative import ConservativeSystem, Invariant, PoissonSystem
from ..errors import DegeneracyError, SingularityError
from ..forms import AlternatingFormEvaluator

STANDARD_IC = np.array([0.4, 0.0, 0.0, 2.0])
ORBIT_PERIOD = 2.0 * np.pi  # for the standard ICs (semi-major axis 1)
PREFACTOR_TOL = 1e-12


@dataclass(frozen=True)
class KeplerState:
    x: np.ndarray
    v: np.ndarray

    @property
    def array(self):
        return np.concatenate([np.asarray(self.x, dtype=float), np.asarray(self.v, dtype=float)])


def _split(state):
    state = np.asarray(state, dtype=float)
    return state[..., :2], state[..., 2:]


def rhs(state):
    x, v = _split(state)
    r3 = np.linalg.norm(x, axis=-1, keepdims=True) ** 3
    return np.concatenate([v, -x / r3], axis=-1)


def kepler_invariants(state):
    """Energy H, scalar angular momentum L, and eccentricity vector A."""
    x, v = _split(state)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise SingularityError("zero separation")
    H = 0.5 * np.sum(v * v, axis=-1) - 1.0 / r
    L = x[..., 0] * v[..., 1] - x[..., 1] * v[..., 0]
    A = np.stack([v[..., 1] * L - x[..., 0] / r, -v[..., 0] * L - x[..., 1] / r], axis=-1)
    return H, L, A


def energy(state):
    return kepler_invariants(state)[0]


def angular_momentum(state):
    x, v = _split(state)
    return x[..., 0] * v[..., 1] - x[..., 1] * v[..., 0]


def grad_H(state):
    x, v = _split(state)
    r3 = np.linalg.norm(x, axis=-1, keepdims=True) ** 3
    return np.concatenate([x / r3, v], axis=-1)


def _grad_A(state, p):
    x, v = _split(state)
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    vv = np.sum(v * v, axis=-1, keepdims=True)
    xv = np.sum(x * v, axis=-1, keepdims=True)
    e = np.zeros_like(x)
    e[..., p] = 1.0
    gx = x[..., p:p + 1] * x / r**3 - v[..., p:p + 1] * v + (vv - 1.0 / r) * e
    gv = 2.0 * x[..., p:p + 1] * v - v[..., p:p + 1] * x - xv * e
    return np.concatenate([gx, gv], axis=-1)


def grad_A1(state):
    return _grad_A(state, 0)


def grad_A2(state):
    return _grad_A(state, 1)


def _det3(m):
    return (m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
            - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
            + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0]))


def _prefactor(state):
    H, L, _ = kepler_invariants(state)
    return 2.0 * L * H


def form_rhs(state, ws):
    """F(x)[w_H, w_A1, w_A2, e_k] for batches: signed 3x3 cofactors over 2LH.

    Near-degenerate prefactors (radial or parabolic orbits) yield NaN rows so
    the implicit solver rejects the iterate.
    """
    W = np.stack(ws, axis=-1)  # (..., 4, 3)
    rows = np.arange(4)
    out = np.empty(state.shape)
    for k in range(4):
        minor = W[..., rows != k, :]
        out[..., k] = (-1.0) ** k * _det3(minor)
    pref = _prefactor(state)
    pref = np.where(np.abs(pref) < PREFACTOR_TOL, np.nan, pref)
    return out / pref[..., None]


def kepler_form(state) -> AlternatingFormEvaluator:
    """Alternating 4-form: det of the stacked argument columns over 2LH."""
    state = np.asarray(state, dtype=float)
    pref = float(_prefactor(state))
    if abs(pref) < PREFACTOR_TOL:
        raise DegeneracyError("2LH prefactor vanishes (radial or parabolic orbit)")

    def evaluate(y, n1, n2, n3):
        m = np.stack(np.broadcast_arrays(y, n1, n2, n3), axis=-1)
        return np.linalg.det(m) / pref

    # scheme argument order: auxiliaries first, test vector last
    return AlternatingFormEvaluator(arity=4, dim=4,
                                    eval=lambda n1, n2, n3, y: evaluate(y, n1, n2, n3))


def gradients_stacked(state):
    """Gradients of H, A1, A2 in one pass, stacked on a leading axis."""
    state = np.asarray(state, dtype=float)
    x, v = _split(state)
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    x_r3 = x / r**3
    vv = np.sum(v * v, axis=-1, keepdims=True)
    xv = np.sum(x * v, axis=-1, keepdims=True)
    out = np.empty((3,) + state.shape)
    out[0, ..., :2] = x_r3
    out[0, ..., 2:] = v
    for p_ in (0, 1):
        e = np.zeros(2)
        e[p_] = 1.0
        out[1 + p_, ..., :2] = x[..., p_:p_ + 1] * x_r3 - v[..., p_:p_ + 1] * v + (vv - 1.0 / r) * e
        out[1 + p_, ..., 2:] = 2.0 * x[..., p_:p_ + 1] * v - v[..., p_:p_ + 1] * x - xv * e
    return out


INVARIANTS = [
    Invariant("H", energy, grad_H),
    Invariant("A1", lambda s: kepler_invariants(s)[2][..., 0], grad_A1),
    Invariant("A2", lambda s: kepler_invariants(s)[2][..., 1], grad_A2),
]


def system() -> ConservativeSystem:
    return ConservativeSystem(dim=4, f=rhs, invariants=INVARIANTS,
                              form=kepler_form, form_rhs=form_rhs,
                              gradients_stacked=gradients_stacked)


CANONICAL_B = np.array([
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, -1.0, 0.0, 0.0],
])


def poisson_system() -> PoissonSystem:
    """Canonical Hamiltonian form, used by the discrete-gradient baseline."""
    return PoissonSystem(dim=4, B=CANONICAL_B, H=energy, grad_H=grad_H)
