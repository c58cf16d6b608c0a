"""Barycentric Lagrange interpolation helpers on small node sets."""

import numpy as np


def barycentric_weights(nodes):
    nodes = np.asarray(nodes, dtype=float)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / diff.prod(axis=1)


def eval_matrix(nodes, points):
    """Matrix E with E[a, j] = L_j(points[a]) for the Lagrange basis on ``nodes``.

    Exact (up to rounding) when a point coincides with a node.
    """
    nodes = np.asarray(nodes, dtype=float)
    points = np.atleast_1d(np.asarray(points, dtype=float))
    w = barycentric_weights(nodes)
    diff = points[:, None] - nodes[None, :]
    hit = np.isclose(diff, 0.0, rtol=0.0, atol=1e-14)
    safe = np.where(hit, 1.0, diff)
    terms = w[None, :] / safe
    denom = terms.sum(axis=1)
    out = terms / denom[:, None]
    rows_on_node = hit.any(axis=1)
    out[rows_on_node] = hit[rows_on_node].astype(float)
    return out


def diff_matrix(nodes):
    """Differentiation matrix D with (D c)[j] = p'(nodes[j]) for p interpolating c."""
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    w = barycentric_weights(nodes)
    D = np.zeros((n, n))
    for j in range(n):
        for k in range(n):
            if j != k:
                D[j, k] = (w[k] / w[j]) / (nodes[j] - nodes[k])
        D[j, j] = -D[j].sum()
    return D


def deriv_eval_matrix(nodes, points):
    """Matrix E' with E'[a, j] = L_j'(points[a]).

    Computed as interpolation of the nodal derivative values; exact because the
    derivative of a degree-(n-1) polynomial is again representable on n nodes.
    """
    return eval_matrix(nodes, points) @ diff_matrix(nodes)
