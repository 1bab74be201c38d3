"""l1-norm coherence and negativity of qubit-qutrit states."""

from __future__ import annotations

import enum

import numpy as np

from . import numerics
from .errors import MissingHamiltonian


class CoherenceBasis(str, enum.Enum):
    COMPUTATIONAL = "computational"
    EIGEN = "eigen"


def to_basis(rho, vectors) -> np.ndarray:
    """Matrix elements of ``rho`` in the orthonormal basis given by the columns of ``vectors``."""
    v = numerics.as_matrix(vectors)
    return v.conj().T @ numerics.as_matrix(rho) @ v


def l1_coherence(rho, basis: CoherenceBasis = CoherenceBasis.COMPUTATIONAL, hB=None, *, eigenvectors=None) -> float:
    """Sum of |rho_ij| over i != j in the chosen reference basis.

    ``CoherenceBasis.EIGEN`` uses the eigenvectors of ``hB``; pass a precomputed
    ``eigenvectors`` matrix to skip the diagonalisation. For degenerate ``hB`` the
    eigenbasis is whatever the Jacobi solver returns.
    """
    m = numerics.as_matrix(rho)
    if CoherenceBasis(basis) is CoherenceBasis.EIGEN:
        if eigenvectors is None:
            if hB is None:
                raise MissingHamiltonian("eigenbasis coherence needs the battery Hamiltonian")
            eigenvectors = numerics.hermitian_eig(hB).eigenvectors
        m = to_basis(m, eigenvectors)
    a = np.abs(m)
    return float(a.sum() - np.trace(a))


def negativity_pair(rho) -> tuple[float, float]:
    """Negativity by the trace-norm formula and by the negative-eigenvalue sum.

    Both come from one eigendecomposition of the qubit partial transpose.
    """
    lam = numerics.eigvalsh(numerics.partial_transpose_qubit(rho))
    from_norm = (float(np.sum(np.abs(lam))) - 1.0) / 2.0
    from_neg = float(-np.sum(lam[lam < 0]))
    return from_norm, from_neg


def negativity(rho) -> float:
    # (||rho^T_A||_1 - 1)/2 can dip a few ulps below zero for PPT states
    return max(negativity_pair(rho)[0], 0.0)
