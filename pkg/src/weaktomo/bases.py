"""Equidistant non-orthogonal bases and their bi-orthogonal duals.

For a prime dimension ``p`` and separation ``lam`` the family holds

* ``psi[p]``: the equidistant basis, Gram matrix ``(1-lam) I + lam J``;
* ``phi[s]``: the dual of ``psi[s]``, with ``<phi_m|psi_n> = delta_mn / sqrt(mu)``;
* ``psi[s], phi[s]`` for ``s = 1..p-1``: right and left eigenvectors of the
  non-unitary monomial ``Z^s X``;
* ``psi[0]``: the orthonormal eigenbasis of the unitary shift ``X``.

Everything is expressed in the computational representation in which the
equidistant vectors are the columns of the principal square root of their
Gram matrix. In that frame ``X`` is the plain cyclic shift.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidInput,
    LabelMismatch,
    LambdaOutOfRange,
    NotPositiveDefinite,
    SingularGram,
    ValidationFailed,
    WrongDimension,
)
from .linalg import (
    TOL,
    Tolerances,
    adjoint,
    eig_general,
    fix_global_phase,
    frobenius,
    mod_inverse,
    require_prime,
)

PRIMAL, DUAL, ORTHONORMAL = "primal", "dual", "orthonormal"


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SeparationParams:
    p: int
    lam: float
    eta: float
    mu: float
    omega: complex

    @property
    def inv2(self) -> int:
        """``2^{-1} mod p``; undefined for ``p = 2``."""
        if self.p == 2:
            raise WrongDimension("2 has no inverse modulo 2")
        return mod_inverse(2, self.p)


def lambda_bounds(p: int) -> tuple[float, float]:
    """Open interval of admissible separations for dimension ``p``."""
    return -1.0 / (p - 1), 1.0


def make_params(p: int, lam: float) -> SeparationParams:
    p = require_prime(p)
    lam = float(lam)
    lo, hi = lambda_bounds(p)
    if not (np.isfinite(lam) and lo < lam < hi):
        raise LambdaOutOfRange(
            f"lambda={lam!r} outside the open interval ({lo:.6g}, {hi:g}) for p={p}"
        )
    eta = -lam / (1 + (p - 2) * lam)
    mu = (1 + (p - 2) * lam) / ((1 - lam) * (1 + (p - 1) * lam))
    omega = complex(np.exp(2j * np.pi / p))
    return SeparationParams(p, lam, eta, mu, omega)


def omega_power(params: SeparationParams, e: int) -> complex:
    """``omega**e`` evaluated with the exponent reduced mod p."""
    return complex(np.exp(2j * np.pi * (e % params.p) / params.p))


@dataclass(frozen=True)
class Basis:
    label: int
    kind: str
    vectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vectors", _frozen(self.vectors))

    def __getitem__(self, k: int) -> np.ndarray:
        return self.vectors[:, k]

    def __len__(self) -> int:
        return self.vectors.shape[1]

    def gram(self) -> np.ndarray:
        return adjoint(self.vectors) @ self.vectors


@dataclass(frozen=True)
class OperatorSet:
    """Clock ``Z`` and shift ``X`` plus the bi-orthogonal pair ``(psi, phi)``
    that diagonalizes ``Z``.

    In the coordinates of that pair ``Z`` acts as ``diag(omega^k)`` and ``X``
    as the cyclic shift ``e_k -> e_{k+1}``.
    """

    Z: np.ndarray
    X: np.ndarray
    psi: Basis | None = None
    phi: Basis | None = None

    def __post_init__(self):
        object.__setattr__(self, "Z", _frozen(self.Z))
        object.__setattr__(self, "X", _frozen(self.X))

    def monomial(self, t: int, r: int) -> np.ndarray:
        """``Z^t X^r`` with ``t, r`` taken mod p (``Z^p = X^p = I``)."""
        p = self.Z.shape[0]
        return np.linalg.matrix_power(self.Z, t % p) @ np.linalg.matrix_power(
            self.X, r % p
        )


def coordinate_monomial(params: "SeparationParams", t: int, r: int) -> np.ndarray:
    """Matrix of ``Z^t X^r`` in the coordinates of the equidistant pair."""
    p = params.p
    clock = np.diag([omega_power(params, t * k) for k in range(p)])
    shift = np.roll(np.eye(p, dtype=complex), r % p, axis=0)
    return clock @ shift


@dataclass(frozen=True)
class BasisFamily:
    params: SeparationParams
    psi: dict
    phi: dict
    operators: OperatorSet

    @property
    def p(self) -> int:
        return self.params.p

    @property
    def lam(self) -> float:
        return self.params.lam

    def projector(self, s: int, k: int) -> np.ndarray:
        """Bi-orthogonal projector ``sqrt(mu) |psi_k^s><phi_k^s|`` for s >= 1,
        and the orthogonal projector onto ``psi_k^0`` for s = 0."""
        if s == 0:
            v = self.psi[0][k]
            return np.outer(v, v.conj())
        return np.sqrt(self.params.mu) * np.outer(self.psi[s][k], self.phi[s][k].conj())

    def transformed(self, u) -> "BasisFamily":
        """The same family in another frame, ``v -> U v`` and ``A -> U A U^H``."""
        u = np.asarray(u, dtype=complex)
        psi = {s: Basis(b.label, b.kind, u @ b.vectors) for s, b in self.psi.items()}
        phi = {s: Basis(b.label, b.kind, u @ b.vectors) for s, b in self.phi.items()}
        o = self.operators
        ops = OperatorSet(
            u @ o.Z @ adjoint(u), u @ o.X @ adjoint(u),
            None if o.psi is None else Basis(o.psi.label, o.psi.kind, u @ o.psi.vectors),
            None if o.phi is None else Basis(o.phi.label, o.phi.kind, u @ o.phi.vectors),
        )
        return BasisFamily(self.params, psi, phi, ops)


def make_equidistant_basis(params: SeparationParams) -> Basis:
    """Columns of the principal square root of ``(1-lam) I + lam J``.

    The Gram matrix has eigenvalue ``1+(p-1)lam`` on the all-ones vector and
    ``1-lam`` on its complement, so the square root is written through those
    two spectral projectors rather than a numerical eigensolver.
    """
    p, lam = params.p, params.lam
    lo, hi = 1 - lam, 1 + (p - 1) * lam
    if min(lo, hi) <= TOL.positive:
        raise NotPositiveDefinite(f"Gram matrix has eigenvalue {min(lo, hi):.3e}")
    ones = np.full((p, p), 1.0 / p)
    root = np.sqrt(lo) * (np.eye(p) - ones) + np.sqrt(hi) * ones
    return Basis(p, PRIMAL, root + 0j)


def dual_basis(psi: Basis, params: SeparationParams | None = None) -> Basis:
    """Unit-norm bi-orthogonal partner of ``psi``.

    ``phi_m`` is the m-th column of ``(Psi^+)^H`` normalized, computed from an
    SVD of the vector matrix, which is better conditioned than inverting the
    Gram matrix. ``<phi_m|psi_m>`` comes out real and positive.
    """
    u, s, vh = np.linalg.svd(psi.vectors)
    if s[-1] <= np.sqrt(TOL.positive) * max(s[0], 1.0):
        raise SingularGram(f"primal Gram matrix is singular (sigma_min^2={s[-1] ** 2:.2e})")
    cols = (u / s) @ vh
    cols = cols / np.linalg.norm(cols, axis=0)
    return Basis(psi.label, DUAL, cols)


def build_operators(psi: Basis, phi: Basis, params: SeparationParams) -> OperatorSet:
    """Clock ``Z = sum_k omega^k P_k`` and shift ``X = sqrt(mu) sum_k |psi_{k+1}><phi_k|``."""
    p, mu = params.p, params.mu
    z = np.zeros((p, p), dtype=complex)
    x = np.zeros((p, p), dtype=complex)
    for k in range(p):
        z += omega_power(params, k) * np.outer(psi[k], phi[k].conj())
        x += np.outer(psi[(k + 1) % p], phi[k].conj())
    return OperatorSet(np.sqrt(mu) * z, np.sqrt(mu) * x, psi, phi)


def _assign_labels(eigenvalues, params: SeparationParams, exponent_to_label, tol: Tolerances):
    p = params.p
    labels = []
    for val in eigenvalues:
        e = int(np.round(np.angle(val) * p / (2 * np.pi))) % p
        if abs(val - omega_power(params, e)) > tol.eig_match:
            raise LabelMismatch(f"eigenvalue {val:.8g} is not a {p}-th root of unity")
        labels.append(exponent_to_label(e) % p)
    if sorted(labels) != list(range(p)):
        raise LabelMismatch(f"eigenvalue labels {labels} are not a permutation")
    return labels


def _eigen_bases(m, params, exponent_to_label, tol, frame=None):
    """Labeled right/left eigenvectors of ``m``.

    With ``frame = (psi, phi)`` the matrix ``m`` is given in the coordinates
    of that bi-orthogonal pair and the eigenvectors are mapped back.
    """
    es = eig_general(m, tol)
    labels = _assign_labels(es.eigenvalues, params, exponent_to_label, tol)
    p = params.p
    right = np.empty((p, p), dtype=complex)
    left = np.empty((p, p), dtype=complex)
    for i, k in enumerate(labels):
        right[:, k] = es.right[:, i]
        left[:, k] = es.left[:, i]
    if frame is not None:
        right = frame[0].vectors @ right
        left = frame[1].vectors @ left
    right = right / np.linalg.norm(right, axis=0)
    left = left / np.linalg.norm(left, axis=0)
    # <phi_k|psi_k> real-positive, then the global phase of psi_k carried to phi_k
    left = left * np.exp(1j * np.angle(np.einsum("ik,ik->k", left.conj(), right)))
    fixed = fix_global_phase(right)
    phase = np.einsum("ik,ik->k", right.conj(), fixed)
    return fixed, left * phase


def derive_basis(ops: OperatorSet, params: SeparationParams, s: int, tol: Tolerances = TOL):
    """``(psi^s, phi^s)`` from the eigendecomposition of ``Z^s X``.

    The eigenvalue ``omega^{2^{-1} s - k}`` labels index ``k``. The operator
    is diagonalized in the coordinates of the pair that defines ``Z`` and
    ``X``, where it is the unitary ``diag(omega^{sk}) * shift``; this avoids
    the eigenvector ill-conditioning of the non-normal matrix as lam -> 1.
    """
    p = params.p
    if p == 2:
        raise WrongDimension("derive_basis needs p >= 3; use weaktomo.qubit for p = 2")
    if not 1 <= s <= p - 1:
        raise InvalidInput(f"basis label s={s} outside 1..{p - 1}")
    if ops.psi is None or ops.phi is None:
        raise InvalidInput("operator set carries no spectral pair")
    half_s = params.inv2 * s
    right, left = _eigen_bases(
        coordinate_monomial(params, s, 1), params, lambda e: half_s - e, tol, (ops.psi, ops.phi)
    )
    return Basis(s, PRIMAL, right), Basis(s, DUAL, left)


def derive_basis_zero(ops: OperatorSet, params: SeparationParams, tol: Tolerances = TOL) -> Basis:
    """Orthonormal eigenbasis of ``X`` with ``X psi_m^0 = omega^{-m} psi_m^0``."""
    right, _ = _eigen_bases(ops.X, params, lambda e: -e, tol)
    return Basis(0, ORTHONORMAL, right)


def _assemble(params: SeparationParams, tol: Tolerances) -> BasisFamily:
    p = params.p
    psi_p = make_equidistant_basis(params)
    phi_p = dual_basis(psi_p, params)
    ops = build_operators(psi_p, phi_p, params)
    psi = {p: psi_p}
    phi = {p: phi_p}
    if p == 2:
        from .qubit import qubit_basis_one

        psi[1] = qubit_basis_one(psi_p)
        phi[1] = dual_basis(psi[1], params)
    else:
        for s in range(1, p):
            psi[s], phi[s] = derive_basis(ops, params, s, tol)
    psi[0] = derive_basis_zero(ops, params, tol)
    return BasisFamily(params, dict(sorted(psi.items())), dict(sorted(phi.items())), ops)


def build_family(p: int, lam: float, tol: Tolerances = TOL) -> BasisFamily:
    family = _assemble(make_params(p, lam), tol)
    report = validate_family(family, tol)
    if not report.passed:
        raise ValidationFailed(report.failures(), report.tolerance)
    return family


@dataclass
class ValidationReport:
    residuals: dict = field(default_factory=dict)
    tolerance: float = TOL.identity

    @property
    def passed(self) -> bool:
        return all(v <= self.tolerance for v in self.residuals.values())

    def failures(self) -> dict:
        return {k: v for k, v in self.residuals.items() if not v <= self.tolerance}

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
        }


def validate_family(family: BasisFamily, tol: Tolerances = TOL) -> ValidationReport:
    """Max residual of every structural identity the family must satisfy."""
    prm = family.params
    p, lam, mu, eta = prm.p, prm.lam, prm.mu, prm.eta
    eye = np.eye(p)
    off = ~np.eye(p, dtype=bool)
    psi, phi, ops = family.psi, family.phi, family.operators
    labels = range(1, p + 1)
    res = {}

    res["unit_norm"] = max(
        float(np.max(np.abs(np.linalg.norm(b.vectors, axis=0) - 1)))
        for b in list(psi.values()) + list(phi.values())
    )
    target = np.abs((1 - lam) * eye + lam)
    res["equidistance"] = max(
        float(np.max(np.abs(np.abs(psi[s].gram()) - target))) for s in labels
    )
    res["equidistance_real_gram"] = float(
        np.max(np.abs(psi[p].gram() - ((1 - lam) * eye + lam)))
    )
    res["dual_separation"] = max(
        float(np.max(np.abs(np.abs(phi[s].gram())[off] - abs(eta)))) if p > 1 else 0.0
        for s in labels
    )
    res["duality"] = max(
        float(np.max(np.abs(adjoint(phi[s].vectors) @ psi[s].vectors - eye / np.sqrt(mu))))
        for s in labels
    )
    unb = 0.0
    for t in labels:
        for s in labels:
            if s == t:
                continue
            ov = np.abs(adjoint(phi[t].vectors) @ psi[s].vectors) ** 2
            unb = max(unb, float(np.max(np.abs(ov - 1 / (mu * p)))))
    res["unbiasedness"] = unb
    res["resolution_of_identity"] = max(
        frobenius(sum(family.projector(s, k) for k in range(p)) - eye) for s in labels
    )
    res["clock_cycle"] = frobenius(np.linalg.matrix_power(ops.Z, p) - eye)
    res["shift_cycle"] = frobenius(np.linalg.matrix_power(ops.X, p) - eye)
    res["shift_unitary"] = frobenius(ops.X @ adjoint(ops.X) - eye)
    res["shift_action"] = max(
        float(np.linalg.norm(ops.X @ psi[p][k] - psi[p][(k + 1) % p])) for k in range(p)
    )
    res["orthonormal_zero"] = float(np.max(np.abs(psi[0].gram() - eye)))
    res["shift_eigenbasis"] = max(
        float(np.linalg.norm(ops.X @ psi[0][m] - omega_power(prm, -m) * psi[0][m]))
        for m in range(p)
    )
    e8 = e9 = 0.0
    for s in labels:
        a = np.abs(adjoint(psi[0].vectors) @ psi[s].vectors) ** 2
        b = np.abs(adjoint(psi[0].vectors) @ phi[s].vectors) ** 2
        e8 = max(e8, float(np.max(np.abs(a[0] - (1 + (p - 1) * lam) / p))))
        e8 = max(e8, float(np.max(np.abs(b[0] - (1 + (p - 1) * eta) / p))))
        e9 = max(e9, float(np.max(np.abs(a[1:] - (1 - lam) / p))) if p > 1 else 0.0)
        e9 = max(e9, float(np.max(np.abs(b[1:] - (1 - eta) / p))) if p > 1 else 0.0)
    res["zero_overlap_ground"] = e8
    res["zero_overlap_rest"] = e9
    res["spectral_decomposition"] = _spectral_residual(family)
    return ValidationReport(res, tol.identity)


def spectral_form(family: BasisFamily, t: int, r: int) -> np.ndarray:
    """``sum_k omega^{(2^{-1} t - k) r} P_k^s`` with ``s = t r^{-1}`` (p >= 3)."""
    prm = family.params
    p = prm.p
    s = (t * mod_inverse(r, p)) % p
    return sum(
        omega_power(prm, (prm.inv2 * t - k) * r) * family.projector(s, k) for k in range(p)
    )


def _spectral_residual(family: BasisFamily) -> float:
    prm, ops = family.params, family.operators
    p = prm.p
    if p == 2:
        zx = 1j * (family.projector(1, 0) - family.projector(1, 1))
        clock = family.projector(2, 0) - family.projector(2, 1)
        return max(
            frobenius(ops.monomial(1, 1) - zx), frobenius(ops.monomial(1, 0) - clock)
        )
    worst = frobenius(
        ops.Z - sum(omega_power(prm, k) * family.projector(p, k) for k in range(p))
    )
    for s in range(1, p):
        # canonical pair (t, r) = (s, 1) and an alternative with r = 2
        for r in (1, 2):
            t = (s * r) % p
            worst = max(worst, frobenius(ops.monomial(t, r) - spectral_form(family, t, r)))
    return worst


# --- serialization -----------------------------------------------------------


def _vec_to_json(v):
    return [[float(z.real), float(z.imag)] for z in v]


def _vec_from_json(rows):
    a = np.asarray(rows, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def family_to_dict(family: BasisFamily) -> dict:
    prm = family.params
    bases = []
    for s, b in family.psi.items():
        bases.append({"s": s, "kind": b.kind, "vectors": [_vec_to_json(b[k]) for k in range(len(b))]})
    for s, b in family.phi.items():
        bases.append({"s": s, "kind": b.kind, "vectors": [_vec_to_json(b[k]) for k in range(len(b))]})
    return {"p": prm.p, "lambda": prm.lam, "eta": prm.eta, "mu": prm.mu, "bases": bases}


def family_from_dict(doc: dict, tol: Tolerances = TOL, validate: bool = True) -> BasisFamily:
    try:
        params = make_params(doc["p"], doc["lambda"])
        psi, phi = {}, {}
        for entry in doc["bases"]:
            vecs = _vec_from_json(entry["vectors"]).T
            if vecs.shape != (params.p, params.p):
                raise DimensionMismatch(
                    f"basis s={entry['s']} has shape {vecs.shape}, expected {(params.p, params.p)}"
                )
            target = phi if entry["kind"] == DUAL else psi
            target[int(entry["s"])] = Basis(int(entry["s"]), entry["kind"], vecs)
    except (KeyError, TypeError, IndexError) as exc:
        raise InvalidInput(f"malformed basis family document: {exc}") from exc
    p = params.p
    if sorted(psi) != list(range(p + 1)) or sorted(phi) != list(range(1, p + 1)):
        raise InvalidInput("basis family document is missing bases")
    ops = build_operators(psi[p], phi[p], params)
    family = BasisFamily(params, dict(sorted(psi.items())), dict(sorted(phi.items())), ops)
    if validate:
        report = validate_family(family, tol)
        if not report.passed:
            raise ValidationFailed(report.failures(), report.tolerance)
    return family


def save_family(family: BasisFamily, path, report: ValidationReport | None = None) -> str:
    doc = family_to_dict(family)
    if report is not None:
        doc["validation"] = report.to_dict()
    text = json.dumps(doc, indent=1)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def load_family(path, tol: Tolerances = TOL, validate: bool = True) -> BasisFamily:
    return family_from_dict(json.loads(Path(path).read_text()), tol, validate)
