"""Heavy-top dynamics of Kovalevskaya type with four conserved quantities.

State layout: (n1, n2, n3, l1, l2, l3) with orientation vector n and body
angular momentum l; the inertia matrix is diag(1, 1, 2).  Conserved are the
energy H = n.e1 + l.Jl/2, the squared orientation norm, the vertical angular
momentum l.n and the quartic invariant K = |xi|^2 with
xi = (l1 + i l2)^2 - 2 (n1 + i n2).
"""

import numpy as np

from ..conservative import ConservativeSystem, Invariant
from ..errors import DegeneracyError
from ..forms import AlternatingFormEvaluator, MultilinearFormEvaluator, alternatise

J_DIAG = np.array([1.0, 1.0, 2.0])
E1 = np.array([1.0, 0.0, 0.0])
STANDARD_IC = np.array([0.8, 0.6, 0.0, 2.0, 0.0, 0.2])
PREFACTOR_TOL = 1e-12


def _split(state):
    state = np.asarray(state, dtype=float)
    return state[..., :3], state[..., 3:]


def _cross3(u, v):
    """Elementwise cross product on (..., 3) arrays (cheaper than np.cross here)."""
    out = np.empty(np.broadcast_shapes(u.shape, v.shape))
    out[..., 0] = u[..., 1] * v[..., 2] - u[..., 2] * v[..., 1]
    out[..., 1] = u[..., 2] * v[..., 0] - u[..., 0] * v[..., 2]
    out[..., 2] = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    return out


def rhs(state):
    n, l = _split(state)
    Jl = J_DIAG * l
    return np.concatenate([_cross3(n, Jl), _cross3(n, np.broadcast_to(E1, n.shape)) + _cross3(l, Jl)], axis=-1)


def _xi(state):
    n, l = _split(state)
    xi_r = l[..., 0] ** 2 - l[..., 1] ** 2 - 2.0 * n[..., 0]
    xi_i = 2.0 * l[..., 0] * l[..., 1] - 2.0 * n[..., 1]
    return xi_r, xi_i


def kovalevskaya_invariants(state):
    """Returns (H, |n|^2, l.n, K)."""
    n, l = _split(state)
    H = n[..., 0] + 0.5 * np.sum(l * (J_DIAG * l), axis=-1)
    Nsq = np.sum(n * n, axis=-1)
    L = np.sum(l * n, axis=-1)
    xi_r, xi_i = _xi(state)
    K = xi_r**2 + xi_i**2
    return H, Nsq, L, K


def grad_H(state):
    n, l = _split(state)
    return np.concatenate([np.broadcast_to(E1, n.shape), J_DIAG * l], axis=-1)


def grad_K(state):
    n, l = _split(state)
    xi_r, xi_i = _xi(state)
    zeros = np.zeros_like(xi_r)
    gn = np.stack([-4.0 * xi_r, -4.0 * xi_i, zeros], axis=-1)
    gl = 4.0 * np.stack([xi_r * l[..., 0] + xi_i * l[..., 1],
                         -xi_r * l[..., 1] + xi_i * l[..., 0],
                         zeros], axis=-1)
    return np.concatenate([gn, gl], axis=-1)


def grad_L(state):
    n, l = _split(state)
    return np.concatenate([l, n], axis=-1)


def grad_half_nsq(state):
    n, _ = _split(state)
    return np.concatenate([n, np.zeros_like(n)], axis=-1)


def _base_form_eval(n, l):
    """Multilinear kernel: det of the momentum parts of the first three
    arguments, times n . (orientation part of the fourth), times the pairing
    of the last argument with the velocity field."""
    Jl = J_DIAG * l
    r = np.concatenate([np.cross(n, Jl), np.cross(n, E1) + np.cross(l, Jl)], axis=-1)

    def evaluate(v1, v2, v3, v4, v5):
        b1, b2, b3 = v1[..., 3:], v2[..., 3:], v3[..., 3:]
        det = np.einsum("...i,...i->...", b1, np.cross(b2, b3))
        return det * np.einsum("...i,...i->...", n, v4[..., :3]) * np.einsum("...i,...i->...", r, v5)

    return evaluate


def _prefactor(state):
    n, l = _split(state)
    Jl = J_DIAG * l
    gl_K = grad_K(state)[..., 3:]
    det = np.einsum("...i,...i->...", Jl, _cross3(gl_K, n))
    return 6.0 * det * np.sum(n * n, axis=-1)


def kovalevskaya_form(state) -> AlternatingFormEvaluator:
    """Alternating 5-form at a state: alternatised kernel over its prefactor."""
    state = np.asarray(state, dtype=float)
    pref = float(_prefactor(state))
    if abs(pref) < PREFACTOR_TOL:
        raise DegeneracyError("Kovalevskaya form prefactor vanishes at this state")
    n, l = _split(state)
    alt = alternatise(MultilinearFormEvaluator(arity=5, dim=6, eval=_base_form_eval(n, l)))
    return AlternatingFormEvaluator(arity=5, dim=6,
                                    eval=lambda *args: alt.eval(*args) / pref)


def _splitting_signs():
    """Sign table for expanding the alternatisation of the product kernel.

    Each term picks an unordered triple S for the determinant slot, one index
    for the orientation pairing and one for the velocity pairing; summing the
    3! orderings of S collapses the 5! permutations into 20 signed terms.
    """
    import itertools

    table = []
    for S in itertools.combinations(range(5), 3):
        rest = [i for i in range(5) if i not in S]
        for i, j in (rest, rest[::-1]):
            perm = list(S) + [i, j]
            sign = 1
            for a in range(5):
                for b in range(a + 1, 5):
                    if perm[a] > perm[b]:
                        sign = -sign
            table.append((S, i, j, 6 * sign))
    return table

_SPLITTINGS = _splitting_signs()


def form_rhs(state, ws):
    """F(x)[w_H, w_K, w_L, w_N, e_k] batched over leading axes.

    Expands the alternatised kernel over the 20 subset splittings, with the
    basis argument appearing either in the velocity pairing, the orientation
    pairing, or the determinant (where it contributes a cross product).
    """
    state = np.asarray(state, dtype=float)
    n, l = _split(state)
    Jl = J_DIAG * l
    r = np.concatenate([_cross3(n, Jl), _cross3(n, np.broadcast_to(E1, n.shape)) + _cross3(l, Jl)], axis=-1)
    batch = np.broadcast_shapes(state.shape[:-1], *[np.shape(w)[:-1] for w in ws])
    wfull = [np.broadcast_to(w, batch + (6,)) for w in ws]
    a = [w[..., :3] for w in wfull]
    b = [w[..., 3:] for w in wfull]
    n_dot_a = [np.einsum("...i,...i->...", n, ai) for ai in a]
    f_dot_w = [np.einsum("...i,...i->...", r, w) for w in wfull]
    crosses = {(p, q): _cross3(b[p], b[q]) for p in range(4) for q in range(p + 1, 4)}
    dets = {S: np.einsum("...i,...i->...", b[S[0]], crosses[(S[1], S[2])])
            for S in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))}

    coeff_r = 0.0
    coeff_n = 0.0
    coeff_cross = {pq: 0.0 for pq in crosses}
    for S, i, j, sign in _SPLITTINGS:
        if j == 4:
            coeff_r = coeff_r + sign * dets[S] * n_dot_a[i]
        elif i == 4:
            coeff_n = coeff_n + sign * dets[S] * f_dot_w[j]
        else:
            p, q = [t for t in S if t != 4]
            # S is sorted, so the basis slot is the final det column
            coeff_cross[(p, q)] = coeff_cross[(p, q)] + sign * n_dot_a[i] * f_dot_w[j]

    out = np.empty(batch + (6,))
    out[:] = np.asarray(coeff_r)[..., None] * r
    out[..., :3] += np.asarray(coeff_n)[..., None] * n
    for pq, cf in coeff_cross.items():
        out[..., 3:] += np.asarray(cf)[..., None] * crosses[pq]
    pref = _prefactor(state)
    pref = np.where(np.abs(pref) < PREFACTOR_TOL, np.nan, pref)
    return out / pref[..., None]


def gradients_stacked(state):
    """All four invariant gradients in one pass, stacked on a leading axis."""
    state = np.asarray(state, dtype=float)
    n, l = _split(state)
    out = np.empty((4,) + state.shape)
    out[0, ..., :3] = E1
    out[0, ..., 3:] = J_DIAG * l
    xi_r, xi_i = _xi(state)
    out[1, ..., 0] = -4.0 * xi_r
    out[1, ..., 1] = -4.0 * xi_i
    out[1, ..., 2] = 0.0
    out[1, ..., 3] = 4.0 * (xi_r * l[..., 0] + xi_i * l[..., 1])
    out[1, ..., 4] = 4.0 * (-xi_r * l[..., 1] + xi_i * l[..., 0])
    out[1, ..., 5] = 0.0
    out[2, ..., :3] = l
    out[2, ..., 3:] = n
    out[3, ..., :3] = n
    out[3, ..., 3:] = 0.0
    return out


INVARIANTS = [
    Invariant("H", lambda s: kovalevskaya_invariants(s)[0], grad_H),
    Invariant("K", lambda s: kovalevskaya_invariants(s)[3], grad_K),
    Invariant("L", lambda s: kovalevskaya_invariants(s)[2], grad_L),
    Invariant("half_nsq", lambda s: 0.5 * kovalevskaya_invariants(s)[1], grad_half_nsq),
]


def system() -> ConservativeSystem:
    return ConservativeSystem(dim=6, f=rhs, invariants=INVARIANTS,
                              form=kovalevskaya_form, form_rhs=form_rhs,
                              gradients_stacked=gradients_stacked)
