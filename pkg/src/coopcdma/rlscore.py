"""Shared recursive least squares primitives.

All recursions maintain the inverse of an exponentially weighted correlation
matrix via the matrix inversion lemma and are re-symmetrized each step to
suppress Hermitian drift on long decision-directed runs.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalDivergenceError


def resym(A: np.ndarray) -> np.ndarray:
    """Project back onto the Hermitian cone; cheap drift control."""
    return 0.5 * (A + A.conj().T)


def check_finite(A: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(A)):
        raise NumericalDivergenceError(f"non-finite entries in {what}")


def correlation_gain(Phi: np.ndarray, r: np.ndarray, alpha: float):
    """One rank-one inverse-correlation update.

    Returns the gain vector k = Phi r / (alpha + r^H Phi r) and the updated
    inverse Phi' = (Phi - k r^H Phi) / alpha, i.e. the inverse of
    alpha*R + r r^H when Phi was the inverse of R.
    """
    Pr = Phi @ r
    denom = alpha + float(np.real(np.vdot(r, Pr)))
    k = Pr / denom
    Phi = (Phi - np.outer(k, r.conj() @ Phi)) / alpha
    return k, resym(Phi)


class ExpWeightedInverse:
    """Inverse of an exponentially weighted normal matrix, updated row-wise.

    Tracks the inverse of  alpha^i * delta*I + sum_l alpha^(i-l) V[l]^H V[l]
    using one Sherman-Morrison step per regressor row.
    """

    def __init__(self, dim: int, delta: float = 0.01):
        self.dim = dim
        self.inv = np.eye(dim, dtype=complex) / delta

    def update_rows(self, V: np.ndarray, alpha: float) -> None:
        inv = self.inv / alpha
        for row in V:
            g = row.conj()
            u = inv @ g
            denom = 1.0 + float(np.real(np.vdot(g, u)))
            inv -= np.outer(u, u.conj()) / denom
        self.inv = resym(inv)
        check_finite(self.inv, "inverse normal matrix")
