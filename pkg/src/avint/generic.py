"""Energy-conserving, entropy-dissipating integrators for GENERIC ODEs.

A GENERIC system couples a skew (reversible) and a positive-semidefinite
(irreversible) matrix through degeneracy conditions.  The scheme projects both
the energy and entropy gradients onto the test space and evaluates extended
matrices on those auxiliaries, preserving exact energy balance and the entropy
inequality step by step.
"""

from dataclasses import dataclass

import numpy as np

from .conservative import _solve_polynomial_step
from .errors import ConsistencyError
from .quadrature import IntegralOperator
from .timepoly import StageSpace

_PSD_EIG_TOL = -1e-10
_VALIDATION_SAMPLES = 100


def _default_state_sampler(dim):
    return lambda rng: rng.standard_normal(dim)


@dataclass
class GenericOdeSystem:
    """dx/dt = B(x) grad E(x) + D(x) grad S(x) with extended matrices.

    ``B_ext(x, w_S)`` and ``D_ext(x, w_E)`` evaluate the skew and friction
    matrices on auxiliary arguments; both must broadcast over leading axes and
    may return NaN entries for out-of-domain auxiliaries (the implicit solver
    treats those iterates as rejected).  ``B`` / ``D`` are the optional base
    matrices used in consistency checks.  The samplers draw states and
    realisable auxiliary arguments for the randomized registration checks;
    gradient components that are state-independent are detected there and kept
    exact instead of projected.
    """

    dim: int
    energy: callable
    entropy: callable
    grad_energy: callable
    grad_entropy: callable
    B_ext: callable
    D_ext: callable
    grads_both: callable = None
    B: callable = None
    D: callable = None
    sample_state: callable = None
    sample_aux_energy: callable = None
    sample_aux_entropy: callable = None
    constant_grad_energy: np.ndarray = None
    constant_grad_entropy: np.ndarray = None

    def __post_init__(self):
        if self.sample_state is None:
            self.sample_state = _default_state_sampler(self.dim)
        if self.sample_aux_energy is None:
            self.sample_aux_energy = lambda rng: rng.standard_normal(self.dim)
        if self.sample_aux_entropy is None:
            self.sample_aux_entropy = lambda rng: rng.standard_normal(self.dim)
        if self.grads_both is None:
            self.grads_both = lambda x: (self.grad_energy(x), self.grad_entropy(x))
        if self.constant_grad_energy is None or self.constant_grad_entropy is None:
            rng = np.random.default_rng(0)
            states = np.stack([self.sample_state(rng) for _ in range(8)])
            ge = np.asarray(self.grad_energy(states))
            gs = np.asarray(self.grad_entropy(states))
            self.constant_grad_energy = np.all(np.abs(ge - ge[0]) < 1e-14, axis=0)
            self.constant_grad_entropy = np.all(np.abs(gs - gs[0]) < 1e-14, axis=0)

    def rhs(self, x):
        wE = self.grad_energy(x)
        wS = self.grad_entropy(x)
        return (np.einsum("...ij,...j->...i", self.B_ext(x, wS), wE)
                + np.einsum("...ij,...j->...i", self.D_ext(x, wE), wS))

    def validate(self, rng=None, samples=_VALIDATION_SAMPLES, tol=1e-10):
        """Randomized check of skewness, positive semidefiniteness, degeneracy
        and consistency with the base matrices; raises on the first violation."""
        rng = np.random.default_rng(0) if rng is None else rng
        for _ in range(samples):
            x = np.asarray(self.sample_state(rng), dtype=float)
            wE = np.asarray(self.sample_aux_energy(rng), dtype=float)
            wS = np.asarray(self.sample_aux_entropy(rng), dtype=float)
            Bt = np.asarray(self.B_ext(x, wS), dtype=float)
            Dt = np.asarray(self.D_ext(x, wE), dtype=float)
            scale_b = max(1.0, np.max(np.abs(Bt)))
            scale_d = max(1.0, np.max(np.abs(Dt)))
            if np.max(np.abs(Bt + Bt.T)) > tol * scale_b:
                raise ConsistencyError("extended Poisson matrix is not skew-symmetric")
            min_eig = float(np.linalg.eigvalsh(0.5 * (Dt + Dt.T)).min())
            if min_eig < _PSD_EIG_TOL * scale_d:
                raise ConsistencyError(f"extended friction matrix is not PSD (min eig {min_eig:.2e})")
            if np.max(np.abs(wS @ Bt)) > tol * scale_b * max(1.0, np.max(np.abs(wS))):
                raise ConsistencyError("entropy-gradient degeneracy of B is violated")
            if np.max(np.abs(wE @ Dt)) > tol * scale_d * max(1.0, np.max(np.abs(wE))):
                raise ConsistencyError("energy-gradient degeneracy of D is violated")
            if self.B is not None:
                defect = np.max(np.abs(self.B_ext(x, self.grad_entropy(x)) - self.B(x)))
                if defect > tol * scale_b:
                    raise ConsistencyError("B_ext does not reduce to B on the exact gradient")
            if self.D is not None:
                defect = np.max(np.abs(self.D_ext(x, self.grad_energy(x)) - self.D(x)))
                if defect > tol * scale_d:
                    raise ConsistencyError("D_ext does not reduce to D on the exact gradient")


@dataclass(frozen=True)
class DegeneracyReport:
    skew_defect: float
    psd_min_eig: float
    degeneracy_defect_b: float
    degeneracy_defect_d: float


def check_degeneracy(sys: GenericOdeSystem, x, w_E, w_S) -> DegeneracyReport:
    """Measure how well the extended matrices satisfy the structural conditions."""
    x = np.asarray(x, dtype=float)
    w_E = np.asarray(w_E, dtype=float)
    w_S = np.asarray(w_S, dtype=float)
    Bt = np.asarray(sys.B_ext(x, w_S), dtype=float)
    Dt = np.asarray(sys.D_ext(x, w_E), dtype=float)
    return DegeneracyReport(
        skew_defect=float(np.max(np.abs(Bt + Bt.T))),
        psd_min_eig=float(np.linalg.eigvalsh(0.5 * (Dt + Dt.T)).min()),
        degeneracy_defect_b=float(np.max(np.abs(w_S @ Bt))),
        degeneracy_defect_d=float(np.max(np.abs(w_E @ Dt))),
    )


def step_generic(sys: GenericOdeSystem, x_n, dt, s, op: IntegralOperator,
                 *, newton_tol=1e-12, newton_max_iter=50, counters=None):
    """One energy/entropy-stable step; returns the end state.

    The auxiliaries are eliminated: per Newton iterate the energy and entropy
    gradients along the trial polynomial are projected onto the test space
    (components detected as constant are kept exact), and the residual applies
    B_ext(x, w_S) w_E + D_ext(x, w_E) w_S.
    """
    sp = StageSpace(s, op)
    const_e = np.asarray(sys.constant_grad_energy, dtype=bool)
    const_s = np.asarray(sys.constant_grad_entropy, dtype=bool)

    def project(g, const_mask):
        # constant components project to themselves; keep them exact
        w = sp.projection @ g
        if const_mask.any():
            w[..., const_mask] = g[..., :1, const_mask]
        return w

    def rhs_fn(C, X_ref):
        GE, GS = sys.grads_both(X_ref)
        GE = np.asarray(GE, dtype=float)
        GS = np.asarray(GS, dtype=float)
        wE = project(GE, const_e)
        wS = project(GS, const_s)
        if sp.collocation:
            X = C[:, 1:, :]
        else:
            X = X_ref
            wE = sp.test_eval_ref @ wE
            wS = sp.test_eval_ref @ wS
            if const_e.any():
                wE[..., const_e] = GE[..., const_e]
            if const_s.any():
                wS[..., const_s] = GS[..., const_s]
        Bt = np.asarray(sys.B_ext(X, wS), dtype=float)
        Dt = np.asarray(sys.D_ext(X, wE), dtype=float)
        return (np.einsum("...ij,...j->...i", Bt, wE)
                + np.einsum("...ij,...j->...i", Dt, wS))

    x_next, _ = _solve_polynomial_step(x_n, dt, sp, rhs_fn, newton_tol, newton_max_iter,
                                       counters, predictor_f=sys.rhs)
    return x_next
