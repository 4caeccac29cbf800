"""Weak values of a density matrix and the reconstruction built from them.

The weak value of ``rho`` for pre-selection ``psi_k^s`` and post-selection
``phi_k^s`` is

    W_k^s = <phi_k^s| rho |psi_k^s> / <phi_k^s|psi_k^s>,

and together with the probabilities ``p_0k`` in the orthonormal basis they
reconstruct the state linearly:

    rho = sum_k p_0k P_k^0 + sum_{s,k} W_k^s Pt_k^s - I.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bases import BasisFamily, SeparationParams, omega_power
from .errors import DimensionMismatch, InvalidInput, InvalidState, WrongDimension
from .linalg import TOL, Tolerances, adjoint, frobenius, mod_inverse, require_prime


@dataclass(frozen=True)
class DensityMatrix:
    """A validated state: Hermitian, unit trace, positive semidefinite."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        check_state(rho)
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def p(self) -> int:
        return self.rho.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.rho if dtype is None else self.rho.astype(dtype)


def check_state(rho, tol: Tolerances = TOL) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidState(f"density matrix must be square, got shape {rho.shape}")
    asym = float(np.max(np.abs(rho - adjoint(rho))))
    if asym > tol.hermitian:
        raise InvalidState(f"density matrix not Hermitian (asymmetry {asym:.2e})")
    tr = np.trace(rho)
    if abs(tr - 1) > tol.state_trace:
        raise InvalidState(f"density matrix trace {tr:.12g} != 1")
    lo = float(np.linalg.eigvalsh(0.5 * (rho + adjoint(rho))).min())
    if lo < -tol.state_psd:
        raise InvalidState(f"density matrix has negative eigenvalue {lo:.3e}")


def as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.rho
    return np.asarray(rho, dtype=complex)


def random_density_matrix(p: int, rng: np.random.Generator, kind: str = "ginibre") -> np.ndarray:
    """Seeded random state.

    ``ginibre``: ``A A^H / Tr(A A^H)`` with complex Gaussian ``A`` (full rank).
    ``pure``: projector onto a normalized complex Gaussian vector.
    """
    if kind == "ginibre":
        a = rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p))
        rho = a @ adjoint(a)
    elif kind == "pure":
        v = rng.normal(size=p) + 1j * rng.normal(size=p)
        rho = np.outer(v, v.conj())
    elif kind == "maximally_mixed":
        rho = np.eye(p, dtype=complex)
    else:
        raise InvalidInput(f"unknown state ensemble {kind!r}")
    rho = 0.5 * (rho + adjoint(rho))
    return rho / np.trace(rho).real


def _check_dim(rho, family: BasisFamily):
    if rho.shape != (family.p, family.p):
        raise DimensionMismatch(
            f"state has shape {rho.shape} but the basis family is for p={family.p}"
        )


@dataclass(frozen=True)
class WeakValueTable:
    """``W[s-1, k]`` holds ``W_k^s`` for ``s = 1..p``; ``p0[k]`` the
    probabilities in the orthonormal basis."""

    p: int
    lam: float
    W: np.ndarray
    p0: np.ndarray

    def weak(self, s: int, k: int) -> complex:
        return complex(self.W[s - 1, k])

    def normalization_residual(self) -> float:
        return float(np.max(np.abs(self.W.sum(axis=1) - 1)))

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "lambda": self.lam,
            "p0": [float(x) for x in self.p0],
            "W": [[[float(z.real), float(z.imag)] for z in row] for row in self.W],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "WeakValueTable":
        try:
            w = np.asarray(doc["W"], dtype=float)
            table = cls(int(doc["p"]), float(doc["lambda"]), w[..., 0] + 1j * w[..., 1],
                        np.asarray(doc["p0"], dtype=float))
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise InvalidInput(f"malformed weak value table: {exc}") from exc
        if table.W.shape != (table.p, table.p) or table.p0.shape != (table.p,):
            raise DimensionMismatch("weak value table shape does not match p")
        return table


def weak_values(rho, family: BasisFamily) -> WeakValueTable:
    rho = as_matrix(rho)
    _check_dim(rho, family)
    p = family.p
    w = np.empty((p, p), dtype=complex)
    for s in range(1, p + 1):
        psi, phi = family.psi[s].vectors, family.phi[s].vectors
        num = np.einsum("ik,ij,jk->k", phi.conj(), rho, psi)
        den = np.einsum("ik,ik->k", phi.conj(), psi)
        w[s - 1] = num / den
    v0 = family.psi[0].vectors
    p0 = np.einsum("ik,ij,jk->k", v0.conj(), rho, v0).real
    return WeakValueTable(p, family.lam, w, p0)


def _check_table(table: WeakValueTable, family: BasisFamily):
    if table.p != family.p:
        raise DimensionMismatch(f"table is for p={table.p}, family for p={family.p}")


def reconstruct(table: WeakValueTable, family: BasisFamily) -> np.ndarray:
    """Linear inversion over the bi-orthogonal projectors."""
    _check_table(table, family)
    p = family.p
    rho = -np.eye(p, dtype=complex)
    for k in range(p):
        rho += table.p0[k] * family.projector(0, k)
    for s in range(1, p + 1):
        for k in range(p):
            rho += table.W[s - 1, k] * family.projector(s, k)
    return rho


def reconstruct_adjoint(table: WeakValueTable, family: BasisFamily) -> np.ndarray:
    """Same expansion over the adjoint projectors with conjugated weak values."""
    _check_table(table, family)
    p = family.p
    rho = -np.eye(p, dtype=complex)
    for k in range(p):
        rho += table.p0[k] * family.projector(0, k)
    for s in range(1, p + 1):
        for k in range(p):
            rho += np.conj(table.W[s - 1, k]) * adjoint(family.projector(s, k))
    return rho


@dataclass(frozen=True)
class CoefficientGrid:
    """``c[t, r]`` with ``rho = sum c[t, r] Z^t X^r``.

    ``route_residual`` is the largest disagreement between the trace formula
    and the expression through weak values and probabilities.
    """

    c: np.ndarray
    route_residual: float


def _inverse_monomial(family: BasisFamily, t: int, r: int) -> np.ndarray:
    # (Z^t X^r)^{-1} = X^{r dagger} Z^{-t}; Z^{-1} = Z^{p-1}
    ops = family.operators
    p = family.p
    return np.linalg.matrix_power(adjoint(ops.X), r % p) @ np.linalg.matrix_power(ops.Z, (-t) % p)


def coefficients_by_trace(rho, family: BasisFamily) -> np.ndarray:
    rho = as_matrix(rho)
    _check_dim(rho, family)
    p = family.p
    c = np.empty((p, p), dtype=complex)
    for t in range(p):
        for r in range(p):
            c[t, r] = np.trace(rho @ _inverse_monomial(family, t, r)) / p
    return c


def coefficients_from_table(table: WeakValueTable, params: SeparationParams) -> np.ndarray:
    """Monomial coefficients computed from weak values and probabilities alone."""
    p = params.p
    ks = np.arange(p)
    c = np.empty((p, p), dtype=complex)
    c[0, 0] = 1 / p
    wp = table.W[p - 1]
    for t in range(1, p):
        c[t, 0] = np.sum(np.exp(-2j * np.pi * ((t * ks) % p) / p) * wp) / p
    for r in range(1, p):
        c[0, r] = np.sum(np.exp(2j * np.pi * ((r * ks) % p) / p) * table.p0) / p
    if p == 2:
        c[1, 1] = 0.5j * (table.W[0, 1] - table.W[0, 0])
        return c
    inv2 = mod_inverse(2, p)
    for t in range(1, p):
        for r in range(1, p):
            s = (t * mod_inverse(r, p)) % p
            phase = omega_power(params, -inv2 * t * r)
            c[t, r] = phase * np.sum(np.exp(2j * np.pi * ((r * ks) % p) / p) * table.W[s - 1]) / p
    return c


def coefficients(rho, family: BasisFamily) -> CoefficientGrid:
    c = coefficients_by_trace(rho, family)
    alt = coefficients_from_table(weak_values(rho, family), family.params)
    return CoefficientGrid(c, float(np.max(np.abs(c - alt))))


def reconstruct_via_monomials(rho, family: BasisFamily) -> np.ndarray:
    """Independent route: expand in ``Z^t X^r`` with trace-formula coefficients."""
    c = coefficients_by_trace(rho, family)
    p = family.p
    return sum(c[t, r] * family.operators.monomial(t, r) for t in range(p) for r in range(p))


def reciprocity_residual(family: BasisFamily) -> float:
    """Max deviation of ``Tr{X^r X^{r'H}}`` and ``Tr{Z^t Z^{-t'}}`` from ``p delta``."""
    p = family.p
    ops = family.operators
    worst = 0.0
    for a in range(p):
        for b in range(p):
            want = p if a == b else 0.0
            xx = np.trace(ops.monomial(0, a) @ adjoint(ops.monomial(0, b)))
            zz = np.trace(ops.monomial(a, 0) @ np.linalg.matrix_power(ops.Z, (-b) % p))
            worst = max(worst, abs(xx - want), abs(zz - want))
    return float(worst)


@dataclass(frozen=True)
class ConstraintReport:
    pairs: tuple
    residuals: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residuals))) if len(self.residuals) else 0.0


def constraint_residuals(table: WeakValueTable, params: SeparationParams) -> ConstraintReport:
    """Relations between weak values and their conjugates, one per pair ``n > m``.

    For each pair the Fourier-weighted brackets

        B_k^s = 2i (1 - lam d_m0) Im W_k^s - p lam d_m0 conj(W_k^s)

    over the equidistant basis and over the derived bases sum to zero.
    """
    p, lam = params.p, params.lam
    if p == 2:
        raise WrongDimension("the p = 2 relation is con2_residual in weaktomo.qubit")
    if table.p != p:
        raise DimensionMismatch(f"table is for p={table.p}, params for p={p}")
    ks = np.arange(p)
    pairs, out = [], []
    for m in range(p - 1):
        d = 1.0 if m == 0 else 0.0
        bracket = 2j * (1 - lam * d) * table.W.imag - p * lam * d * np.conj(table.W)
        for n in range(m + 1, p):
            lhs = np.sum(np.exp(-2j * np.pi * (((n - m) * ks) % p) / p) * bracket[p - 1])
            rhs = 0j
            for s in range(1, p):
                h = mod_inverse(2 * s, p)
                e = (h * (n - m) * (2 * ks - (n + m))) % p
                rhs += np.sum(np.exp(2j * np.pi * e / p) * bracket[s - 1])
            pairs.append((m, n))
            out.append(lhs + rhs)
    return ConstraintReport(tuple(pairs), np.asarray(out))


def parameter_audit(p: int) -> tuple[int, int]:
    """(real parameters in the raw expansion, independent real parameters)."""
    p = require_prime(p)
    return (2 * p + 1) * (p - 1), p * p - 1


# --- serialization -----------------------------------------------------------


def matrix_to_json(m) -> list:
    m = np.asarray(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(rows) -> np.ndarray:
    a = np.asarray(rows, dtype=float)
    if a.ndim != 3 or a.shape[-1] != 2:
        raise InvalidInput("matrix must be nested [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def save_state(rho, path) -> str:
    rho = as_matrix(rho)
    text = json.dumps({"p": rho.shape[0], "rho": matrix_to_json(rho)}, indent=1)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def load_state(path) -> DensityMatrix:
    try:
        doc = json.loads(Path(path).read_text())
        rows = doc["rho"] if isinstance(doc, dict) else doc
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"malformed state file {path}: {exc}") from exc
    return DensityMatrix(matrix_from_json(rows))


def frobenius_error(a, b) -> float:
    return frobenius(as_matrix(a) - as_matrix(b))
