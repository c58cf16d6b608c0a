"""Long-wave (regularised shallow-water) dynamics on the periodic Hermite space.

Semidiscrete form: (du/dt, v)_{H^1} = (u + u^2/2, dx v).  The conservative
stepper augments this with a projected auxiliary function approximating the
variational derivative of the cubic energy, keeping that energy exact in time;
the collocation stepper is the plain Gauss method on the same semidiscrete
system and conserves the quadratic H^1 invariant instead.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, DivergenceError, NoSolitonError, ParameterError, StepError
from ..lagrange import deriv_eval_matrix, eval_matrix
from ..newton import newton_solve
from ..quadrature import gauss_legendre_rule
from ..timepoly import TestPolynomial
from .space import HermiteFeFunction, PeriodicHermiteSpace

SOLITON_SPEED = (1.0 + math.sqrt(5.0)) / 2.0
SOLITON_AMPLITUDE = (3.0 * math.sqrt(5.0) - 3.0) / 2.0
SOLITON_DECAY = (math.sqrt(5.0) - 1.0) / 4.0
PEAK_MIN_AMPLITUDE = 0.1


@dataclass(frozen=True)
class BbmInvariants:
    H: float   # cubic energy: integral of u^2/2 + u^3/6
    I1: float  # mass
    I2: float  # squared H^1 norm


def bbm_invariants(u) -> BbmInvariants:
    space, coeffs = _unpack(u)
    H = space.integrate_values(lambda v: 0.5 * v**2 + v**3 / 6.0, coeffs)
    I1 = space.integrate_values(lambda v: v, coeffs)
    I2 = float(coeffs @ space.gram_matrix() @ coeffs)
    return BbmInvariants(H=float(H), I1=float(I1), I2=I2)


def _unpack(u):
    if isinstance(u, HermiteFeFunction):
        return u.space, u.coefficients
    raise ParameterError("expected a HermiteFeFunction")


def soliton_ic(space: PeriodicHermiteSpace) -> HermiteFeFunction:
    """Nodal interpolation of the travelling-wave profile a sech^2(kx)."""
    a, k = SOLITON_AMPLITUDE, SOLITON_DECAY

    def f(x):
        return a / np.cosh(k * x) ** 2

    def fprime(x):
        return -2.0 * a * k * np.tanh(k * x) / np.cosh(k * x) ** 2

    return space.interpolate(f, fprime)


class _TimeLayout:
    """Lagrange matrices in time shared by both steppers (exact integrals)."""

    def __init__(self, s: int):
        if s < 1:
            raise ParameterError("stage count must be >= 1")
        self.s = s
        test = gauss_legendre_rule(s)
        self.test_nodes = test.nodes
        self.test_weights = test.weights
        self.trial_nodes = np.concatenate([[0.0], test.nodes])
        # all integrands are polynomial in time of degree <= 3s - 1
        ref = gauss_legendre_rule(math.ceil(1.5 * s) + 1)
        self.ref_nodes, self.ref_weights = ref.nodes, ref.weights
        self.eval_ref = eval_matrix(self.trial_nodes, self.ref_nodes)       # (nq, s+1)
        self.deriv_stage = deriv_eval_matrix(self.trial_nodes, self.test_nodes)
        self.end_eval = eval_matrix(self.trial_nodes, [1.0])[0]
        test_ref = eval_matrix(self.test_nodes, self.ref_nodes)             # (nq, s)
        self.load_weights = (test_ref * self.ref_weights[:, None]).T        # (s, nq)


class ConservativeBbmStepper:
    """Energy-conserving step with a monolithic (u, auxiliary) solve.

    The auxiliary block is linear in the auxiliary given u, so each Newton
    iterate eliminates it through one banded solve with the H^1 Gram.
    """

    def __init__(self, space: PeriodicHermiteSpace, s: int, dt: float,
                 newton_tol: float = 1e-12, newton_max_iter: int = 50):
        self.space = space
        self.t = _TimeLayout(s)
        self.dt = float(dt)
        self.newton_tol = newton_tol
        self.newton_max_iter = newton_max_iter
        self.G = space.gram_matrix()
        self.Bsk = space.skew_matrix()
        self.solver = space.gram_solver()
        self.PB = self.Bsk @ self.solver.solve(np.eye(space.n_dofs))
        self._counters = {}

    def _auxiliary(self, C):
        """Stage values of the auxiliary from the current trial coefficients."""
        U_ref = self.t.eval_ref @ C                       # (nq, N)
        u_quad = self.space.values_at_quadrature(U_ref)   # (nq, M, q)
        load = self.space.nonlinear_load(u_quad)          # (nq, N)
        Q = self.t.load_weights @ load                    # (s, N)
        W = self.solver.solve(Q.T).T / self.t.test_weights[:, None]
        return W, u_quad

    def _residual(self, z, u_n):
        s, N = self.t.s, self.space.n_dofs
        C = np.concatenate([u_n[None, :], z.reshape(s, N)], axis=0)
        W, _ = self._auxiliary(C)
        R = (self.t.deriv_stage @ C) @ self.G.T - self.dt * W @ self.Bsk.T
        return R.ravel()

    def _jacobian(self, z, u_n):
        s, N = self.t.s, self.space.n_dofs
        C = np.concatenate([u_n[None, :], z.reshape(s, N)], axis=0)
        U_ref = self.t.eval_ref @ C
        u_quad = self.space.values_at_quadrature(U_ref)
        Mw = np.stack([self.space.weighted_mass(u_quad[q]) for q in range(len(self.t.ref_nodes))])
        coef = (self.t.load_weights / self.t.test_weights[:, None])[:, :, None] \
            * self.t.eval_ref[None, :, 1:]                # (s, nq, s)
        K = np.einsum("rqp,qij->rpij", coef, Mw)          # (s, s, N, N)
        J = np.empty((s, N, s, N))
        for r in range(s):
            for p in range(s):
                J[r, :, p, :] = self.t.deriv_stage[r, p + 1] * self.G - self.dt * (self.PB @ K[r, p])
        return J.reshape(s * N, s * N)

    def step(self, u_n):
        """Advance one step; returns (end coefficients, auxiliary stage values)."""
        u_n = np.asarray(u_n, dtype=float)
        s, N = self.t.s, self.space.n_dofs
        guess = np.tile(u_n, s)
        try:
            z = newton_solve(lambda zz: self._residual(zz, u_n),
                             jacobian=lambda zz: self._jacobian(zz, u_n),
                             guess=guess, tol=self.newton_tol,
                             max_iter=self.newton_max_iter, counters=self._counters)
        except (ConvergenceError, DivergenceError) as exc:
            raise StepError(f"conservative step failed: {exc}") from exc
        C = np.concatenate([u_n[None, :], z.reshape(s, N)], axis=0)
        W, _ = self._auxiliary(C)
        return self.t.end_eval @ C, W


class GaussBbmStepper:
    """Plain s-stage Gauss collocation on the semidiscrete system."""

    def __init__(self, space: PeriodicHermiteSpace, s: int, dt: float,
                 newton_tol: float = 1e-12, newton_max_iter: int = 50):
        self.space = space
        self.t = _TimeLayout(s)
        self.dt = float(dt)
        self.newton_tol = newton_tol
        self.newton_max_iter = newton_max_iter
        self.G = space.gram_matrix()
        self._counters = {}

    def _residual(self, z, u_n):
        s, N = self.t.s, self.space.n_dofs
        C = np.concatenate([u_n[None, :], z.reshape(s, N)], axis=0)
        u_quad = self.space.values_at_quadrature(z.reshape(s, N))
        load = self.space.transport_load(u_quad)          # (s, N)
        R = (self.t.deriv_stage @ C) @ self.G.T - self.dt * load
        return R.ravel()

    def _jacobian(self, z, u_n):
        s, N = self.t.s, self.space.n_dofs
        u_quad = self.space.values_at_quadrature(z.reshape(s, N))
        J = np.empty((s, N, s, N))
        for r in range(s):
            Aw = self.space.weighted_transport(u_quad[r])
            for p in range(s):
                J[r, :, p, :] = self.t.deriv_stage[r, p + 1] * self.G - (self.dt * (r == p)) * Aw
        return J.reshape(s * N, s * N)

    def step(self, u_n):
        u_n = np.asarray(u_n, dtype=float)
        s, N = self.t.s, self.space.n_dofs
        guess = np.tile(u_n, s)
        try:
            z = newton_solve(lambda zz: self._residual(zz, u_n),
                             jacobian=lambda zz: self._jacobian(zz, u_n),
                             guess=guess, tol=self.newton_tol,
                             max_iter=self.newton_max_iter, counters=self._counters)
        except (ConvergenceError, DivergenceError) as exc:
            raise StepError(f"collocation step failed: {exc}") from exc
        C = np.concatenate([u_n[None, :], z.reshape(s, N)], axis=0)
        return self.t.end_eval @ C


def bbm_step_conservative(u_n: HermiteFeFunction, dt, s, space=None, **kw):
    """One energy-conserving step; returns (u_next, auxiliary test polynomial)."""
    space = space if space is not None else u_n.space
    stepper = ConservativeBbmStepper(space, s, dt, **kw)
    coeffs, W = stepper.step(u_n.coefficients)
    aux = TestPolynomial(degree=s - 1, dim=space.n_dofs, interval=(0.0, dt),
                         nodes=stepper.t.test_nodes, coefficients=W)
    return HermiteFeFunction(space, coeffs), aux


def bbm_step_gauss(u_n: HermiteFeFunction, dt, s, space=None, **kw):
    space = space if space is not None else u_n.space
    stepper = GaussBbmStepper(space, s, dt, **kw)
    return HermiteFeFunction(space, stepper.step(u_n.coefficients))


# -- soliton diagnostics ---------------------------------------------------------------


def peak_position(space: PeriodicHermiteSpace, coeffs, points_per_cell: int = 200):
    """Peak location by dense sampling plus local quadratic refinement."""
    x = space.grid(points_per_cell)
    vals = space.evaluate_on_grid(coeffs, points_per_cell)
    j = int(np.argmax(vals))
    n = x.size
    xm, x0, xp = x[(j - 1) % n], x[j], x[(j + 1) % n]
    ym, y0, yp = vals[(j - 1) % n], vals[j], vals[(j + 1) % n]
    denom = ym - 2.0 * y0 + yp
    offset = 0.0 if denom == 0 else 0.5 * (ym - yp) / denom
    step = x[1] - x[0]
    return float(x0 + offset * step), float(y0)


def soliton_speed(times, snapshots, window=None, space=None, points_per_cell: int = 200):
    """Least-squares speed of the tracked peak over a time window.

    ``snapshots`` is a sequence of HermiteFeFunction (or coefficient vectors
    with ``space`` given); peak positions are unwrapped across the periodic
    boundary before fitting position against time.
    """
    times = np.asarray(times, dtype=float)
    if window is not None:
        lo, hi = window
        mask = (times >= lo) & (times <= hi)
    else:
        mask = np.ones_like(times, dtype=bool)
    idx = np.nonzero(mask)[0]
    if idx.size < 10:
        raise ParameterError("need at least 10 snapshots in the window")
    positions = np.empty(idx.size)
    for out_i, i in enumerate(idx):
        snap = snapshots[i]
        if isinstance(snap, HermiteFeFunction):
            sp, coeffs = snap.space, snap.coefficients
        else:
            sp, coeffs = space, np.asarray(snap, dtype=float)
        pos, amp = peak_position(sp, coeffs, points_per_cell)
        if amp < PEAK_MIN_AMPLITUDE:
            raise NoSolitonError(f"peak amplitude {amp:.3g} below {PEAK_MIN_AMPLITUDE}")
        positions[out_i] = pos
    length = sp.b - sp.a
    jumps = np.diff(positions)
    wraps = np.cumsum(np.where(jumps < -0.5 * length, 1.0, np.where(jumps > 0.5 * length, -1.0, 0.0)))
    positions[1:] += length * wraps
    return float(np.polyfit(times[idx], positions, 1)[0])


def write_snapshot_csv(u: HermiteFeFunction, path, points_per_cell: int = 8):
    """Dump x, u(x) samples (at least 4 per cell) as CSV."""
    if points_per_cell < 4:
        raise ParameterError("need at least 4 sample points per cell")
    space = u.space
    x = space.grid(points_per_cell)
    vals = space.evaluate_on_grid(u.coefficients, points_per_cell)
    with open(path, "w", newline="") as fh:
        fh.write("x,u\n")
        for xi, ui in zip(x, vals):
            fh.write(f"{xi:.17g},{ui:.17g}\n")
