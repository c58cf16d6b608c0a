"""Multilinear and alternating form evaluation.

Forms are evaluation callbacks, not dense tensors: a form of arity k over
R^d is a callable taking k arrays of shape (..., d) (numpy-broadcastable) and
returning the batch of scalar values.  Alternatisation is the signed sum over
all argument permutations.
"""

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConsistencyError, DegeneracyError, ParameterError

MAX_ALTERNATISE_ARITY = 6
DUAL_BASIS_MAX_CONDITION = 1e12


@dataclass(frozen=True)
class MultilinearFormEvaluator:
    """Arity-k multilinear map R^d x ... x R^d -> R given by a callback."""

    arity: int
    dim: int
    eval: callable

    def __call__(self, *args):
        if len(args) != self.arity:
            raise ParameterError(f"form of arity {self.arity} got {len(args)} arguments")
        return self.eval(*[np.asarray(a, dtype=float) for a in args])


@dataclass(frozen=True)
class AlternatingFormEvaluator(MultilinearFormEvaluator):
    """Multilinear form that vanishes whenever two arguments coincide."""


def _permutation_sign(perm):
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def _signed_permutations(k):
    perms = list(itertools.permutations(range(k)))
    signs = np.asarray([_permutation_sign(p) for p in perms], dtype=float)
    # slot_index[j, p] = which argument lands in slot j under permutation p
    slot_index = np.asarray([[p[j] for p in perms] for j in range(k)], dtype=int)
    return perms, signs, slot_index


def alternatise(form: MultilinearFormEvaluator) -> AlternatingFormEvaluator:
    """Signed symmetrisation over all argument permutations (k! terms)."""
    k = form.arity
    if k > MAX_ALTERNATISE_ARITY:
        raise ParameterError(f"arity {k} exceeds {MAX_ALTERNATISE_ARITY} (cost k!)")
    _, signs, slot_index = _signed_permutations(k)

    def evaluate(*args):
        args = [np.asarray(a, dtype=float) for a in args]
        shape = np.broadcast_shapes(*[a.shape for a in args])
        stacked_args = np.stack([np.broadcast_to(a, shape) for a in args], axis=0)
        # slot j of permutation p receives argument slot_index[j, p]
        values = form.eval(*[stacked_args[slot_index[j]] for j in range(k)])
        return np.tensordot(signs, values, axes=(0, 0))

    return AlternatingFormEvaluator(arity=k, dim=form.dim, eval=evaluate)


def functional_vector(form: MultilinearFormEvaluator, heads) -> np.ndarray:
    """Vector u with u[k] = form[heads..., e_k], batched over the heads.

    ``heads`` is a list of arity-1 arrays of shape (..., d); the result has the
    same batch shape with a trailing axis of length d.
    """
    heads = [np.asarray(h, dtype=float) for h in heads]
    d = form.dim
    batch = np.broadcast_shapes(*[h.shape[:-1] for h in heads]) if heads else ()
    basis = np.eye(d).reshape((d,) + (1,) * len(batch) + (d,))
    expanded = [h[None] for h in heads]
    values = form.eval(*expanded, basis)  # (d, *batch)
    return np.moveaxis(values, 0, -1)


def dual_basis(gradients) -> np.ndarray:
    """Vectors m_q with gradients[p] . m_q = delta_pq (minimum-norm choice).

    ``gradients`` stacks P row vectors; the result stacks the dual rows.
    Raises when the Gram matrix is numerically singular.
    """
    N = np.asarray(gradients, dtype=float)
    if N.ndim != 2:
        raise ParameterError("gradients must stack P vectors as rows")
    gram = N @ N.T
    if np.linalg.cond(gram) > DUAL_BASIS_MAX_CONDITION:
        raise DegeneracyError("gradients are nearly linearly dependent")
    return np.linalg.solve(gram, N)  # rows: m_q = N^T (N N^T)^{-1} e_q, transposed


def constructive_F(f, gradients) -> AlternatingFormEvaluator:
    """Alternating (P+1)-form reproducing y . f on the gradient tuple.

    Builds the product form G[n_1, ..., n_P, y] = prod_p (n_p . m_p) (y . f)
    from the dual basis and alternatises it; on [gradients..., y] only the
    identity permutation survives, so the result coincides with y . f there.
    """
    f = np.asarray(f, dtype=float)
    grads = np.asarray(gradients, dtype=float).reshape(-1, f.size) if np.size(gradients) else np.zeros((0, f.size))
    P = grads.shape[0]
    d = f.size
    scale = float(np.linalg.norm(f)) * max(1.0, float(np.max(np.abs(grads))) if P else 1.0)
    for p in range(P):
        if abs(grads[p] @ f) > 1e-10 * max(scale, 1e-30):
            raise ConsistencyError(f"gradient {p} is not orthogonal to the vector field")
    if P == 0:
        return AlternatingFormEvaluator(arity=1, dim=d, eval=lambda y: y @ f)
    m = dual_basis(grads)

    def product_form(*args):
        out = args[-1] @ f
        for p in range(P):
            out = out * (args[p] @ m[p])
        return out

    G = MultilinearFormEvaluator(arity=P + 1, dim=d, eval=product_form)
    return alternatise(G)
