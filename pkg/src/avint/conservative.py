"""Multi-invariant conservative integrators and classical baselines.

The central scheme advances a degree-s polynomial trial function through an
implicit system: the time derivative is tested against degree-(s-1)
polynomials, with every invariant gradient replaced by its projection onto the
test space and the right-hand side rewritten through an alternating form, so
the continuous conservation proofs survive discretisation.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, DivergenceError, ParameterError, StepError
from .forms import constructive_F, functional_vector
from .newton import newton_solve
from .quadrature import IntegralOperator, gauss_legendre_rule
from .timepoly import StageSpace


@dataclass(frozen=True)
class Invariant:
    """A conserved quantity with its analytic gradient (both batched over (..., d))."""

    name: str
    value: callable
    gradient: callable


@dataclass
class ConservativeSystem:
    """General ODE dx/dt = f(x) together with its invariants.

    ``form`` selects the alternating form used on the right-hand side:
    the string "constructive" builds it pointwise from the dual basis of the
    gradients, or supply a factory mapping a state to an
    AlternatingFormEvaluator of arity P+1.  ``form_rhs`` is an optional fast
    path evaluating F(x)[w_1, ..., w_P, e_k] for batches of states and
    projected gradients; when absent it is derived from ``form``.
    """

    dim: int
    f: callable
    invariants: list
    form: object = "constructive"
    form_rhs: callable = None
    gradients_stacked: callable = None

    def __post_init__(self):
        if self.form_rhs is None:
            self.form_rhs = _form_rhs_from_factory(self)
        if self.gradients_stacked is None:
            self.gradients_stacked = lambda x: np.stack(
                [inv.gradient(x) for inv in self.invariants], axis=0)

    def gradients(self, x):
        return [inv.gradient(x) for inv in self.invariants]


def _form_rhs_from_factory(sys):
    """Pointwise adapter: evaluate the form factory state by state."""

    def rhs(x, ws):
        x = np.asarray(x, dtype=float)
        flat_x = x.reshape(-1, sys.dim)
        flat_ws = [np.broadcast_to(w, x.shape).reshape(-1, sys.dim) for w in ws]
        out = np.empty_like(flat_x)
        for i, xi in enumerate(flat_x):
            if sys.form == "constructive":
                grads = [inv.gradient(xi) for inv in sys.invariants]
                F = constructive_F(sys.f(xi), np.asarray(grads))
            else:
                F = sys.form(xi)
            out[i] = functional_vector(F, [w[i] for w in flat_ws])
        return out.reshape(x.shape)

    return rhs


@dataclass
class PoissonSystem:
    """dx/dt = B(x) grad H(x) with a skew-symmetric structure matrix.

    ``B`` is either a constant (d, d) array or a batched callable.
    """

    dim: int
    B: object
    H: callable
    grad_H: callable

    def B_at(self, x):
        if callable(self.B):
            return self.B(x)
        return np.broadcast_to(self.B, np.shape(x)[:-1] + (self.dim, self.dim))

    @property
    def has_constant_B(self):
        return not callable(self.B)


RETRY_ATTEMPTS = 40
_RETRY_SEED = 0x5EED


def _solve_polynomial_step(x_n, dt, sp: StageSpace, rhs_fn, newton_tol, newton_max_iter,
                           counters=None, predictor_f=None):
    """Shared implicit solve: stage values of the trial polynomial are the unknowns.

    ``rhs_fn(C, X_ref)`` returns the right-hand-side values at the test nodes
    (collocation flavour) or at the reference nodes (exact-integral flavour).
    The first Newton attempt extends the previous end value constantly in time;
    if it stalls (the right-hand side can pass near a form degeneracy inside
    the step) the solve is retried from an explicit predictor and then from
    deterministic perturbations of it before the step fails.
    """
    x_n = np.asarray(x_n, dtype=float)
    d = x_n.size
    s = sp.s

    def residual(z):
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        Z = np.atleast_2d(z)
        B = Z.shape[0]
        C = np.concatenate([np.broadcast_to(x_n, (B, 1, d)), Z.reshape(B, s, d)], axis=1)
        with np.errstate(all="ignore"):
            X_ref = sp.eval_ref @ C
            rhs = rhs_fn(C, X_ref)
            if sp.collocation:
                R = sp.deriv_stage @ C - dt * rhs
            else:
                R = sp.test_ref_weighted @ (sp.deriv_ref @ C - dt * rhs)
        R = R.reshape(B, s * d)
        return R[0] if single else R

    def predict():
        if predictor_f is None:
            return None
        with np.errstate(all="ignore"):
            stage = np.empty((s, d))
            for i, tau in enumerate(sp.test_nodes):
                h = dt * tau
                mid = x_n + 0.5 * h * np.asarray(predictor_f(x_n), dtype=float)
                stage[i] = x_n + h * np.asarray(predictor_f(mid), dtype=float)
        return stage.ravel() if np.all(np.isfinite(stage)) else None

    def dogleg(guess, threshold):
        # MINPACK trust-region fallback for iterates trapped near a form
        # degeneracy; any root it returns solves the same discrete system
        with np.errstate(all="ignore"):
            sol = optimize.root(residual, guess, method="hybr", tol=1e-13)
        r = residual(sol.x)
        if np.all(np.isfinite(r)) and np.max(np.abs(r)) <= threshold:
            return sol.x
        return None

    constant = np.tile(x_n, s)
    predicted = predict()

    last_exc = None
    for guess in (constant, predicted):
        if guess is None:
            continue
        try:
            z = newton_solve(residual, guess=guess, tol=newton_tol, max_iter=newton_max_iter,
                             vectorized=True, counters=counters)
            break
        except (ConvergenceError, DivergenceError) as exc:
            last_exc = exc
    else:
        z = None
        base = predicted if predicted is not None else constant
        threshold = newton_tol * max(1.0, float(np.max(np.abs(residual(constant)))))
        rng = np.random.default_rng(_RETRY_SEED)
        scale = max(1.0, float(np.max(np.abs(x_n))))
        for attempt in range(RETRY_ATTEMPTS):
            if attempt == 0:
                guess = constant
            elif attempt == 1:
                guess = base
            else:
                centre = base if attempt % 2 else constant
                guess = centre + rng.normal(scale=min(0.01 * 1.35**attempt, 0.8) * scale,
                                            size=s * d)
            z = dogleg(guess, threshold)
            if z is not None:
                break
        if z is None:
            raise StepError(f"implicit step failed: {last_exc}") from last_exc
    C = np.concatenate([x_n[None, :], z.reshape(s, d)], axis=0)
    return sp.end_eval @ C, C


def step_conservative(sys: ConservativeSystem, x_n, dt, s, op: IntegralOperator,
                      *, newton_tol=1e-12, newton_max_iter=50, counters=None,
                      interval=(0.0, None)):
    """One step of the fully conservative scheme; returns (x_next, trajectory).

    Per Newton iterate each auxiliary variable is the explicit projection of
    the corresponding invariant gradient along the current trial polynomial,
    and the residual applies the alternating form to the auxiliaries.
    """
    sp = StageSpace(s, op)

    def rhs_fn(C, X_ref):
        grads = sys.gradients_stacked(X_ref)                      # (P, B, nq, d)
        Wst = sp.projection @ grads
        if sp.collocation:
            return sys.form_rhs(C[:, 1:, :], list(Wst))
        Wref = sp.test_eval_ref @ Wst
        return sys.form_rhs(X_ref, list(Wref))

    x_next, C = _solve_polynomial_step(x_n, dt, sp, rhs_fn, newton_tol, newton_max_iter,
                                       counters, predictor_f=sys.f)
    t0 = interval[0]
    traj = sp.trial_polynomial((t0, t0 + dt), C)
    return x_next, traj


def step_poisson_conservative(sys: PoissonSystem, x_n, dt, s, op: IntegralOperator,
                              *, newton_tol=1e-12, newton_max_iter=50, counters=None):
    """Energy-conserving step for a Poisson system (single auxiliary variable).

    Specialises the general scheme with P = 1 and the skew form y^T B(x) n.
    """

    def form_rhs(x, ws):
        return np.einsum("...ij,...j->...i", sys.B_at(x), ws[0])

    csys = ConservativeSystem(
        dim=sys.dim,
        f=lambda x: form_rhs(x, [sys.grad_H(x)]),
        invariants=[Invariant("H", sys.H, sys.grad_H)],
        form_rhs=form_rhs,
    )
    x_next, _ = step_conservative(csys, x_n, dt, s, op, newton_tol=newton_tol,
                                  newton_max_iter=newton_max_iter, counters=counters)
    return x_next


def step_implicit_midpoint(f, x_n, dt, *, newton_tol=1e-12, newton_max_iter=50, counters=None):
    """Solve x+ = x_n + dt f((x_n + x+)/2)."""
    x_n = np.asarray(x_n, dtype=float)

    def residual(z):
        z = np.asarray(z, dtype=float)
        mid = 0.5 * (z + x_n)
        with np.errstate(all="ignore"):
            return z - x_n - dt * f(mid)

    try:
        return newton_solve(residual, guess=x_n.copy(), tol=newton_tol,
                            max_iter=newton_max_iter, vectorized=True, counters=counters)
    except (ConvergenceError, DivergenceError) as exc:
        raise StepError(f"implicit midpoint step failed: {exc}") from exc


def step_gauss(f, x_n, dt, s, *, newton_tol=1e-12, newton_max_iter=50, counters=None):
    """Standard s-stage Gauss collocation: dx/dt = f(x) at the Gauss nodes."""
    sp = StageSpace(s, IntegralOperator.stage(s))

    def rhs_fn(C, X_ref):
        return f(C[:, 1:, :])

    x_next, _ = _solve_polynomial_step(x_n, dt, sp, rhs_fn, newton_tol, newton_max_iter, counters)
    return x_next


def step_mean_value_dg(sys: PoissonSystem, x_n, dt, *, reference_rule=None,
                       newton_tol=1e-12, newton_max_iter=50, counters=None):
    """Mean-value discrete-gradient step x+ = x_n + dt B gbar.

    gbar averages grad H along the segment from x_n to x+, evaluated with the
    reference rule, so H is conserved up to that quadrature error.
    """
    if not sys.has_constant_B:
        raise ParameterError("the mean-value discrete-gradient method needs constant B")
    if reference_rule is None:
        reference_rule = gauss_legendre_rule(12)
    x_n = np.asarray(x_n, dtype=float)
    B = np.asarray(sys.B, dtype=float)
    xi = reference_rule.nodes
    wq = reference_rule.weights

    def residual(z):
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        Z = np.atleast_2d(z)
        seg = xi[None, :, None] * Z[:, None, :] + (1.0 - xi)[None, :, None] * x_n[None, None, :]
        with np.errstate(all="ignore"):
            gbar = np.einsum("q,bqd->bd", wq, sys.grad_H(seg))
        R = Z - x_n[None, :] - dt * gbar @ B.T
        return R[0] if single else R

    try:
        return newton_solve(residual, guess=x_n.copy(), tol=newton_tol,
                            max_iter=newton_max_iter, vectorized=True, counters=counters)
    except (ConvergenceError, DivergenceError) as exc:
        raise StepError(f"mean-value discrete-gradient step failed: {exc}") from exc


@dataclass
class TrajectoryResult:
    times: np.ndarray
    states: np.ndarray
    observed: dict = field(default_factory=dict)

    @property
    def num_steps(self):
        return self.times.size - 1


def run_trajectory(stepper, x0, dt, t_final, observers=()):
    """Iterate ``stepper(x, dt)`` and record observer values at step endpoints.

    Step failures are re-raised with the failing step index attached.
    """
    x0 = np.asarray(x0, dtype=float)
    n_steps = int(round(t_final / dt)) if t_final > 0 else 0
    times = np.arange(n_steps + 1) * dt
    states = np.empty((n_steps + 1, x0.size))
    states[0] = x0
    observers = list(observers)
    observed = {name: np.empty(n_steps + 1) for name, _ in observers}
    for name, fn in observers:
        observed[name][0] = fn(x0)
    x = x0
    for k in range(n_steps):
        try:
            x = np.asarray(stepper(x, dt), dtype=float)
        except StepError as exc:
            raise StepError(f"step {k} failed: {exc}", step_index=k) from exc
        states[k + 1] = x
        for name, fn in observers:
            observed[name][k + 1] = fn(x)
    return TrajectoryResult(times=times, states=states, observed=observed)
