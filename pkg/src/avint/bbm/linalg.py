"""Direct solver for banded matrices with periodic corner coupling."""

import numpy as np
from scipy.linalg import lapack

from ..errors import ParameterError


class PeriodicBandedSolver:
    """LU of the banded core plus a Woodbury update for the wrap-around block.

    The matrix is split as A = A_band + U V^T where A_band keeps every entry
    within the bandwidth and U collects the leftover (corner) columns, V being
    the corresponding column indicators.  Solves reuse the banded LU and a
    small dense capacitance factorisation.
    """

    def __init__(self, A, bandwidth):
        A = np.asarray(A, dtype=float)
        n = A.shape[0]
        if A.shape != (n, n):
            raise ParameterError("matrix must be square")
        self.n = n
        self.kl = self.ku = int(bandwidth)
        i, j = np.indices(A.shape)
        outside = (np.abs(i - j) > bandwidth) & (A != 0.0)
        cols = np.unique(j[outside])
        corner = np.zeros_like(A)
        corner[outside] = A[outside]
        self.U = corner[:, cols]              # (n, r)
        self.cols = cols
        band_part = A - corner

        # LAPACK banded storage with kl extra rows for the LU fill-in
        ab = np.zeros((2 * self.kl + self.ku + 1, n))
        for jj in range(n):
            i0 = max(0, jj - self.ku)
            i1 = min(n, jj + self.kl + 1)
            ab[self.kl + self.ku + i0 - jj:self.kl + self.ku + i1 - jj, jj] = band_part[i0:i1, jj]
        lu, piv, info = lapack.dgbtrf(ab, self.kl, self.ku)
        if info != 0:
            raise ParameterError(f"banded LU failed (info={info})")
        self._lu, self._piv = lu, piv

        if cols.size:
            AinvU = self._band_solve(self.U)
            cap = np.eye(cols.size) + AinvU[cols, :]
            self._cap = np.linalg.inv(cap)
            self._AinvU = AinvU
        else:
            self._cap = None

    def _band_solve(self, b):
        b = np.asarray(b, dtype=float)
        x, info = lapack.dgbtrs(self._lu, self.kl, self.ku, b, self._piv)
        if info != 0:
            raise ParameterError(f"banded solve failed (info={info})")
        return x

    def solve(self, b):
        """Solve A x = b for one right-hand side or a stacked (n, k) block."""
        b = np.asarray(b, dtype=float)
        single = b.ndim == 1
        B = b if not single else b[:, None]
        y = self._band_solve(B)
        if self._cap is not None:
            y = y - self._AinvU @ (self._cap @ y[self.cols, :])
        return y[:, 0] if single else y
