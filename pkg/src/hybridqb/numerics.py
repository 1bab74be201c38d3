"""Dense complex linear algebra for the small Hermitian matrices of a 2x3 spin system.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The eigensolver is a
cyclic complex Jacobi method written for n <= ~10; it runs on Python lists because
numpy call overhead dominates at these sizes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NoConvergence, NotHermitian, WrongDimension

HERMITIAN_TOL = 1e-10
MAX_SWEEPS = 100
OFFDIAG_RTOL = 1e-13

QUBIT_DIM = 2
QUTRIT_DIM = 3


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a 2-D complex array (no copy when already one)."""
    a = np.asarray(getattr(m, "mat", m), dtype=complex)
    if a.ndim != 2:
        raise WrongDimension(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and the unitary whose columns are the eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _jacobi(a: list[list[complex]], n: int) -> tuple[list[float], list[list[complex]]]:
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    norm_f = math.sqrt(sum(abs(x) ** 2 for row in a for x in row))
    target = OFFDIAG_RTOL * norm_f

    for _ in range(MAX_SWEEPS + 1):
        off = math.sqrt(sum(2.0 * abs(a[p][q]) ** 2 for p in range(n) for q in range(p + 1, n)))
        if off <= target:
            return [a[k][k].real for k in range(n)], v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                g = abs(apq)
                if g == 0.0:
                    continue
                app = a[p][p].real
                aqq = a[q][q].real
                ph = apq / g
                zeta = (aqq - app) / (2.0 * g)
                t = 1.0 / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                if zeta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # Rotation J: J_pp = c, J_pq = s, J_qp = -s*conj(ph), J_qq = c*conj(ph); A <- J^H A J.
                phc = ph.conjugate()
                jqp = -s * phc
                jqq = c * phc
                for row in a:
                    x, y = row[p], row[q]
                    row[p] = c * x + jqp * y
                    row[q] = s * x + jqq * y
                rp, rq = a[p], a[q]
                jqp_c = jqp.conjugate()
                jqq_c = jqq.conjugate()
                for k in range(n):
                    x, y = rp[k], rq[k]
                    rp[k] = c * x + jqp_c * y
                    rq[k] = s * x + jqq_c * y
                rp[q] = 0j
                rq[p] = 0j
                rp[p] = complex(rp[p].real, 0.0)
                rq[q] = complex(rq[q].real, 0.0)
                for row in v:
                    x, y = row[p], row[q]
                    row[p] = c * x + jqp * y
                    row[q] = s * x + jqq * y
    raise NoConvergence(f"Jacobi did not converge within {MAX_SWEEPS} sweeps")


def hermitian_eig(m, tol: float = HERMITIAN_TOL) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Eigenvalues are returned in ascending order; ties keep their original column
    order. Raises ``NotHermitian`` when ``m`` deviates from ``m^H`` by more than
    ``tol`` in any entry, and ``NoConvergence`` when the sweep budget runs out.
    """
    a = as_matrix(m)
    n = a.shape[0]
    if a.shape != (n, n):
        raise WrongDimension(f"expected a square matrix, got shape {a.shape}")
    if not is_hermitian(a, tol):
        raise NotHermitian(f"max |M - M^H| = {np.max(np.abs(a - a.conj().T)):.3e} exceeds {tol:.1e}")
    a = 0.5 * (a + a.conj().T)

    evals, vecs = _jacobi(a.tolist(), n)
    order = sorted(range(n), key=evals.__getitem__)
    w = np.array([evals[k] for k in order])
    v = np.array(vecs, dtype=complex)[:, order]
    return EigenSystem(w, v)


def eigvalsh(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    return hermitian_eig(m, tol).eigenvalues


def spectral_apply(eig: EigenSystem, f: Callable[[float], complex]) -> np.ndarray:
    """``V diag(f(lambda)) V^H`` for an existing decomposition."""
    fv = np.array([f(float(x)) for x in eig.eigenvalues], dtype=complex)
    v = eig.eigenvectors
    return (v * fv) @ v.conj().T


def hermitian_func(m, f: Callable[[float], complex], tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum."""
    return spectral_apply(hermitian_eig(m, tol), f)


def unitary_propagator(m, t: float, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """``exp(-i m t)`` for Hermitian ``m``."""
    return hermitian_func(m, lambda lam: cmath.exp(-1j * lam * t), tol)


def trace_norm(m, tol: float = HERMITIAN_TOL) -> float:
    return float(np.sum(np.abs(eigvalsh(m, tol))))


def partial_transpose_qubit(m) -> np.ndarray:
    """Transpose the qubit (first) factor of a 6x6 operator on C^2 (x) C^3.

    Row index is ``3*a + b`` with qubit index ``a`` and qutrit index ``b``;
    ``out[(a', b), (a, b')] = m[(a, b), (a', b')]``.
    """
    a = as_matrix(m)
    d = QUBIT_DIM * QUTRIT_DIM
    if a.shape != (d, d):
        raise WrongDimension(f"partial transpose needs a {d}x{d} matrix, got {a.shape}")
    t = a.reshape(QUBIT_DIM, QUTRIT_DIM, QUBIT_DIM, QUTRIT_DIM)
    return t.transpose(2, 1, 0, 3).reshape(d, d).copy()
