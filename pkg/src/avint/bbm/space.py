"""Cubic Hermite finite elements on a uniform periodic interval mesh.

Every mesh node carries a value and a derivative degree of freedom, giving a
C^1 (H^2-conforming) space of dimension 2M under periodic identification.
All element integrals use a fixed 5-point Gauss rule per cell, exact for the
degree-9 integrands appearing in the cubic/nonlinear assemblies.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from ..quadrature import gauss_legendre_rule
from .linalg import PeriodicBandedSolver

CELL_QUAD_POINTS = 5
GRAM_BANDWIDTH = 3


def _hermite_shape(xi):
    """Reference shape functions on [0, 1] and their first two derivatives.

    Order: value-left, derivative-left, value-right, derivative-right; the
    derivative functions are unscaled here (multiply by the cell width h to
    make coefficients equal physical derivatives).
    """
    xi = np.asarray(xi, dtype=float)
    N = np.stack([
        1.0 - 3.0 * xi**2 + 2.0 * xi**3,
        xi - 2.0 * xi**2 + xi**3,
        3.0 * xi**2 - 2.0 * xi**3,
        xi**3 - xi**2,
    ])
    dN = np.stack([
        -6.0 * xi + 6.0 * xi**2,
        1.0 - 4.0 * xi + 3.0 * xi**2,
        6.0 * xi - 6.0 * xi**2,
        3.0 * xi**2 - 2.0 * xi,
    ])
    ddN = np.stack([
        -6.0 + 12.0 * xi,
        -4.0 + 6.0 * xi,
        6.0 - 12.0 * xi,
        6.0 * xi - 2.0,
    ])
    return N, dN, ddN


class PeriodicHermiteSpace:
    def __init__(self, a: float, b: float, num_cells: int):
        if num_cells < 3:
            raise ParameterError("need at least 3 cells")
        if b <= a:
            raise ParameterError("empty domain")
        self.a, self.b = float(a), float(b)
        self.num_cells = int(num_cells)
        self.h = (self.b - self.a) / self.num_cells
        self.n_dofs = 2 * self.num_cells
        self.nodes = self.a + self.h * np.arange(self.num_cells)
        m = np.arange(self.num_cells)
        nxt = (m + 1) % self.num_cells
        self.cell_dofs = np.stack([2 * m, 2 * m + 1, 2 * nxt, 2 * nxt + 1], axis=1)

        rule = gauss_legendre_rule(CELL_QUAD_POINTS)
        self.quad_xi = rule.nodes
        self.quad_w = rule.weights
        N, dN, ddN = _hermite_shape(self.quad_xi)
        scale = np.array([1.0, self.h, 1.0, self.h])[:, None]
        self.N = N * scale          # (4, q): value interpolation
        self.dN = dN * scale        # d/dxi
        self.ddN = ddN * scale      # d^2/dxi^2

        self._gram = None
        self._skew = None
        self._solver = None

    # -- interpolation / evaluation -------------------------------------------------

    def interpolate(self, f, fprime) -> "HermiteFeFunction":
        coeffs = np.empty(self.n_dofs)
        coeffs[0::2] = f(self.nodes)
        coeffs[1::2] = fprime(self.nodes)
        return HermiteFeFunction(self, coeffs)

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        rel = (x - self.a) / self.h
        cell = np.floor(rel).astype(int) % self.num_cells
        xi = rel - np.floor(rel)
        return cell, xi

    def evaluate(self, coeffs, x, derivative=0):
        cell, xi = self._locate(x)
        N, dN, ddN = _hermite_shape(xi)
        basis = (N, dN, ddN)[derivative] * np.array([1.0, self.h, 1.0, self.h])[:, None]
        local = np.asarray(coeffs)[self.cell_dofs[cell]]  # (npts, 4)
        vals = np.einsum("pj,jp->p", local, basis) / self.h**derivative
        return vals

    def grid(self, points_per_cell: int):
        """Uniform sample points covering [a, b) with the cells they fall in."""
        xi = np.arange(points_per_cell) / points_per_cell
        x = (self.nodes[:, None] + self.h * xi[None, :]).ravel()
        return x

    def evaluate_on_grid(self, coeffs, points_per_cell: int):
        """Values on the uniform grid from ``grid`` (vectorised per cell)."""
        xi = np.arange(points_per_cell) / points_per_cell
        N, _, _ = _hermite_shape(xi)
        N = N * np.array([1.0, self.h, 1.0, self.h])[:, None]   # (4, p)
        local = np.asarray(coeffs)[self.cell_dofs]               # (M, 4)
        return (local @ N).ravel()

    # -- assembly --------------------------------------------------------------------

    def _scatter(self, local):
        """Accumulate per-cell (M, 4, 4) blocks into the global matrix."""
        A = np.zeros((self.n_dofs, self.n_dofs))
        rows = self.cell_dofs[:, :, None]
        cols = self.cell_dofs[:, None, :]
        np.add.at(A, (rows, cols), local)
        return A

    def gram_matrix(self):
        """H^1 Gram: integral of phi_i phi_j + phi_i' phi_j' (periodic)."""
        if self._gram is None:
            loc = (self.h * np.einsum("q,iq,jq->ij", self.quad_w, self.N, self.N)
                   + np.einsum("q,iq,jq->ij", self.quad_w, self.dN, self.dN) / self.h)
            self._gram = self._scatter(np.broadcast_to(loc, (self.num_cells, 4, 4)))
        return self._gram

    def skew_matrix(self):
        """Skew part of the transport pairing in H^1.

        Rows test with phi_i, columns carry w = phi_j in
        (w, dx v)_{H^1} = int w v' + w' v''; antisymmetrised afterwards.
        """
        if self._skew is None:
            loc = (np.einsum("q,jq,iq->ij", self.quad_w, self.N, self.dN)
                   + np.einsum("q,jq,iq->ij", self.quad_w, self.dN, self.ddN) / self.h**2)
            A = self._scatter(np.broadcast_to(loc, (self.num_cells, 4, 4)))
            self._skew = 0.5 * (A - A.T)
        return self._skew

    def gram_solver(self) -> PeriodicBandedSolver:
        if self._solver is None:
            self._solver = PeriodicBandedSolver(self.gram_matrix(), GRAM_BANDWIDTH)
        return self._solver

    def values_at_quadrature(self, coeffs):
        """Function values at every cell quadrature point, shape (..., M, q)."""
        local = np.asarray(coeffs)[..., self.cell_dofs]  # (..., M, 4)
        return local @ self.N

    def nonlinear_load(self, u_quad):
        """Load vector of u + u^2/2 against the value basis, from quadrature values."""
        dens = u_quad + 0.5 * u_quad**2
        cell = self.h * np.einsum("q,...mq,iq->...mi", self.quad_w, dens, self.N)
        return self._gather(cell)

    def transport_load(self, u_quad):
        """Load vector of u + u^2/2 against d/dx of the basis."""
        dens = u_quad + 0.5 * u_quad**2
        cell = np.einsum("q,...mq,iq->...mi", self.quad_w, dens, self.dN)
        return self._gather(cell)

    def _gather(self, cell_vectors):
        batch = cell_vectors.shape[:-2]
        out = np.zeros(batch + (self.n_dofs,))
        flat = out.reshape(-1, self.n_dofs)
        cv = cell_vectors.reshape(-1, self.num_cells, 4)
        for i in range(flat.shape[0]):
            np.add.at(flat[i], self.cell_dofs, cv[i])
        return out.reshape(batch + (self.n_dofs,))

    def weighted_mass(self, u_quad):
        """Matrix of (1 + u) phi_i phi_j for the current quadrature values of u."""
        w = self.h * self.quad_w * (1.0 + u_quad)               # (M, q)
        loc = np.einsum("mq,iq,jq->mij", w, self.N, self.N)
        return self._scatter(loc)

    def weighted_transport(self, u_quad):
        """Matrix of (1 + u) phi_j phi_i' (test with the derivative)."""
        w = self.quad_w * (1.0 + u_quad)
        loc = np.einsum("mq,jq,iq->mij", w, self.N, self.dN)
        return self._scatter(loc)

    def integrate_values(self, fn, coeffs):
        """Integral of fn(u(x)) over the domain with the per-cell rule."""
        u_quad = self.values_at_quadrature(coeffs)
        return self.h * np.einsum("q,...mq->...", self.quad_w, fn(u_quad))


def assemble_h1_gram(space: PeriodicHermiteSpace):
    return space.gram_matrix()


@dataclass
class HermiteFeFunction:
    """Finite-element function: value and derivative coefficients per node."""

    space: PeriodicHermiteSpace
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.shape != (self.space.n_dofs,):
            raise ParameterError("coefficient vector does not match the space")

    def __call__(self, x):
        return self.space.evaluate(self.coefficients, np.atleast_1d(x))

    def derivative(self, x):
        return self.space.evaluate(self.coefficients, np.atleast_1d(x), derivative=1)
