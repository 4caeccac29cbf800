"""Textbook orthogonal mutually unbiased bases for prime dimension.

Built from closed-form vectors only, so it serves as an oracle for the
``lam = 0`` limit of the non-orthogonal construction.
"""

import numpy as np


def standard_mub_bases(p: int) -> list:
    """``p + 1`` orthonormal bases, each a ``p x p`` array of column vectors."""
    if p == 2:
        s = 1 / np.sqrt(2)
        return [
            np.array([[1, 0], [0, 1]], dtype=complex),
            np.array([[s, s], [s, -s]], dtype=complex),
            np.array([[s, s], [1j * s, -1j * s]], dtype=complex),
        ]
    j = np.arange(p)
    bases = [np.eye(p, dtype=complex)]
    for b in range(p):
        cols = [np.exp(2j * np.pi * ((b * j * j + k * j) % p) / p) / np.sqrt(p) for k in range(p)]
        bases.append(np.column_stack(cols))
    return bases


def mub_probabilities(rho, bases) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.einsum("ik,ij,jk->k", b.conj(), rho, b).real for b in bases])


def mub_reconstruct(probs, bases) -> np.ndarray:
    """``rho = sum_{b,k} q_k^b |b_k><b_k| - I``."""
    p = bases[0].shape[0]
    rho = -np.eye(p, dtype=complex)
    for q, b in zip(probs, bases):
        rho += (b * q) @ b.conj().T
    return rho
