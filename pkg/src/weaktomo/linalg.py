"""Small dense complex linear algebra shared by the rest of the package.

Matrices are plain ``numpy`` arrays; vectors of a basis are stored as the
columns of a square array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateSpectrum,
    NotHermitian,
    NotInvertible,
    NotPositiveDefinite,
    NotPrime,
)


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    positive: float = 1e-10
    eig_residual: float = 1e-10
    eig_distinct: float = 1e-8
    eig_match: float = 1e-6
    identity: float = 1e-9
    gram: float = 1e-10
    constraint: float = 1e-8
    orthonormal: float = 1e-8
    state_trace: float = 1e-12
    state_psd: float = 1e-10
    completeness: float = 1e-6
    ill_conditioned: float = 1e12


TOL = Tolerances()


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def frobenius(m) -> float:
    return float(np.linalg.norm(m))


def relative_residual(a, b) -> float:
    """``||a - b||_F / max(||b||_F, 1)``."""
    return frobenius(np.asarray(a) - np.asarray(b)) / max(frobenius(b), 1.0)


def is_prime(n: int) -> bool:
    """Deterministic trial division; the dimensions used here are tiny."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def require_prime(p: int) -> int:
    if isinstance(p, bool) or int(p) != p:
        raise NotPrime(f"dimension must be a prime integer, got {p!r}")
    p = int(p)
    if not is_prime(p):
        raise NotPrime(f"dimension {p} is not prime")
    return p


def mod_inverse(a: int, p: int) -> int:
    """Inverse of ``a`` in the field of integers modulo the prime ``p``.

    >>> mod_inverse(2, 5)
    3
    """
    p = require_prime(p)
    if a % p == 0:
        raise NotInvertible(f"{a} has no inverse modulo {p}")
    return pow(a % p, -1, p)


def gram_sqrt_vectors(gram, tol: Tolerances = TOL) -> np.ndarray:
    """Columns ``v_0..v_{n-1}`` whose Gram matrix ``<v_m|v_n>`` equals ``gram``.

    Uses the principal (Hermitian) square root, so any symmetry of the Gram
    matrix under index permutations is inherited by the vector family.
    """
    gram = np.asarray(gram, dtype=complex)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise NotHermitian("Gram matrix must be square")
    asym = np.max(np.abs(gram - adjoint(gram))) if gram.size else 0.0
    if asym > tol.hermitian:
        raise NotHermitian(f"Gram matrix asymmetry {asym:.2e} exceeds {tol.hermitian:.0e}")
    herm = 0.5 * (gram + adjoint(gram))
    if np.allclose(herm.imag, 0.0, atol=0.0):
        w, v = np.linalg.eigh(herm.real)
    else:
        w, v = np.linalg.eigh(herm)
    if w.min() <= tol.positive:
        raise NotPositiveDefinite(f"Gram matrix has eigenvalue {w.min():.3e}")
    return (v * np.sqrt(w)) @ adjoint(v) + 0j


@dataclass(frozen=True)
class EigenSystem:
    """Right/left eigenvectors of a diagonalizable matrix.

    ``right[:, k]`` is unit-norm, and ``left[:, k]`` is scaled so that
    ``left[:, k]^H right[:, k] = 1``. ``pairing[k]`` is the index of the
    k-th eigenpair in the raw solver output.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    pairing: tuple

    def reconstruct(self) -> np.ndarray:
        return (self.right * self.eigenvalues) @ adjoint(self.left)


def eig_general(m, tol: Tolerances = TOL) -> EigenSystem:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("eig_general needs a square matrix")
    if m.shape[0] > 64:
        raise ValueError("eig_general is limited to dimension 64")
    vals, left, right = scipy.linalg.eig(m, left=True, right=True)
    n = len(vals)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(vals[i] - vals[j]) < tol.eig_distinct:
                raise DegenerateSpectrum(
                    f"eigenvalues {vals[i]:.6g} and {vals[j]:.6g} coincide"
                )
    # deterministic order: by phase in [0, 2pi), then modulus
    ang = np.mod(np.angle(vals), 2 * np.pi)
    ang[np.isclose(ang, 2 * np.pi, atol=1e-12, rtol=0)] = 0.0
    order = np.lexsort((np.abs(vals), np.round(ang, 10)))
    vals, left, right = vals[order], left[:, order], right[:, order]
    right = right / np.linalg.norm(right, axis=0)
    overlaps = np.einsum("ik,ik->k", left.conj(), right)
    left = left / overlaps.conj()
    return EigenSystem(vals, right, left, tuple(int(i) for i in order))


def fix_global_phase(vectors: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Rotate each column so its first component above ``tol`` is real-positive."""
    out = np.array(vectors, dtype=complex)
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > tol)
        if idx.size:
            c = col[idx[0]]
            out[:, k] = col * (abs(c) / c)
            out[idx[0], k] = abs(c)
    return out
