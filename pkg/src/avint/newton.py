"""Damped Newton iteration with finite-difference Jacobians."""

import numpy as np

from .errors import ConvergenceError, DivergenceError

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 50
MAX_HALVINGS = 30
_FD_STEP = np.cbrt(np.finfo(float).eps)


def _norm(r):
    r = np.asarray(r)
    if not np.all(np.isfinite(r)):
        return np.inf
    return float(np.max(np.abs(r))) if r.size else 0.0


def _fd_jacobian(residual, z, vectorized, counters):
    n = z.size
    h = _FD_STEP * np.maximum(1.0, np.abs(z))
    if vectorized:
        pts = np.concatenate([z[None, :] + np.diag(h), z[None, :] - np.diag(h)], axis=0)
        vals = np.asarray(residual(pts), dtype=float)
        if counters is not None:
            counters["residual_evals"] = counters.get("residual_evals", 0) + 2 * n
        J = (vals[:n] - vals[n:]).T / (2.0 * h[None, :])
    else:
        J = np.empty((n, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = h[i]
            J[:, i] = (np.asarray(residual(z + e), dtype=float)
                       - np.asarray(residual(z - e), dtype=float)) / (2.0 * h[i])
        if counters is not None:
            counters["residual_evals"] = counters.get("residual_evals", 0) + 2 * n
    return J


def newton_solve(residual, jacobian=None, guess=None, tol=DEFAULT_TOL,
                 max_iter=DEFAULT_MAX_ITER, *, vectorized=False, counters=None):
    """Solve residual(z) = 0 starting from ``guess``.

    Convergence is declared when the max-norm of the residual drops below
    tol * max(1, ||residual(guess)||).  Without an analytic ``jacobian`` a
    central finite-difference one is built (step cbrt(eps) * max(1, |z_i|));
    with ``vectorized=True`` the residual must also accept an (m, n) batch of
    points and the difference stencil is evaluated in one call.  Each update is
    damped by halving (up to 30 times) whenever the residual norm would not
    decrease; iterates with non-finite residuals are rejected the same way.
    """
    z = np.atleast_1d(np.asarray(guess, dtype=float)).copy()

    def call(pts):
        out = np.asarray(residual(pts), dtype=float)
        if counters is not None:
            counters["residual_evals"] = counters.get("residual_evals", 0) + 1
        return out

    r = call(z)
    norm0 = _norm(r)
    if not np.isfinite(norm0):
        raise DivergenceError("residual is non-finite at the initial guess")
    threshold = tol * max(1.0, norm0)
    norm = norm0

    for iteration in range(max_iter):
        if norm <= threshold:
            if counters is not None:
                counters["iterations"] = counters.get("iterations", 0) + iteration
            return z
        if jacobian is not None:
            J = np.asarray(jacobian(z), dtype=float)
            if counters is not None:
                counters["jacobian_evals"] = counters.get("jacobian_evals", 0) + 1
        else:
            J = _fd_jacobian(residual, z, vectorized, counters)
        if not np.all(np.isfinite(J)):
            raise ConvergenceError("Jacobian is non-finite", residual_norm=norm)
        try:
            dz = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"linear solve failed: {exc}", residual_norm=norm) from exc

        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            z_new = z + lam * dz
            r_new = call(z_new)
            norm_new = _norm(r_new)
            if norm_new < norm:
                break
            lam *= 0.5
        else:
            raise ConvergenceError(
                f"line search stalled at residual norm {norm:.3e}", residual_norm=norm
            )
        z, r, norm = z_new, r_new, norm_new

    if norm <= threshold:
        if counters is not None:
            counters["iterations"] = counters.get("iterations", 0) + max_iter
        return z
    raise ConvergenceError(
        f"no convergence in {max_iter} iterations (residual norm {norm:.3e})",
        residual_norm=norm,
    )
