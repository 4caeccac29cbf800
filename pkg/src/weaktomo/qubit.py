"""The qubit case: explicit bases, rotation observables and a two-observable protocol.

Everything here lives in the Bloch frame where the orthonormal basis
``psi^0`` is the computational basis (``|psi_0^0> = |0>``, the north pole)
and the unitary shift is ``X = sigma_z``. The equidistant basis ``psi^2``
and its unbiased partner ``psi^1`` are obtained by rotating the north pole
about ``y`` and ``x``.

The rotation angle ``alpha`` is tied to the separation by
``lam = cos(alpha / 2)``, so ``alpha = pi`` is the orthogonal case. The
rotations are ``R_a(alpha) = exp(i alpha sigma_a / 4)``: this moves the
north pole to polar angle ``alpha / 2``, which is what makes
``|<psi_0^2|psi_1^2>| = lam`` hold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bases import PRIMAL, Basis, BasisFamily, build_family, make_params, SeparationParams
from .errors import BadAngle, BadIndex, DegenerateCondition, IncompleteData, LambdaOutOfRange
from .linalg import TOL, adjoint, fix_global_phase, frobenius
from .tomography import as_matrix

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}
# s = 2 lies in the x-z plane (rotations about y), s = 1 in the y-z plane
_AXIS_FOR_BASIS = {2: "y", 1: "x"}

# Hadamard takes the eigenbasis of the cyclic shift onto the computational basis
_TO_BLOCH = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

NORTH = np.array([1, 0], dtype=complex)
SOUTH = np.array([0, 1], dtype=complex)


def qubit_basis_one(psi2: Basis) -> Basis:
    """``psi_{0,1}^1 = (psi_0^2 +- i psi_1^2) / sqrt(2)``."""
    a, b = psi2[0], psi2[1]
    vecs = np.column_stack([a + 1j * b, a - 1j * b]) / np.sqrt(2)
    return Basis(1, PRIMAL, fix_global_phase(vecs))


def angle_from_lambda(lam: float) -> float:
    return float(2 * np.arccos(lam))


def lambda_from_angle(alpha: float) -> float:
    return float(np.cos(alpha / 2))


@dataclass(frozen=True)
class QubitFamily:
    params: SeparationParams
    alpha: float
    family: BasisFamily

    @property
    def lam(self) -> float:
        return self.params.lam

    @property
    def mu(self) -> float:
        return self.params.mu

    @property
    def psi2(self):
        return self.family.psi[2].vectors

    @property
    def phi2(self):
        return self.family.phi[2].vectors

    @property
    def psi1(self):
        return self.family.psi[1].vectors

    @property
    def phi1(self):
        return self.family.phi[1].vectors

    @property
    def psi0(self):
        return self.family.psi[0].vectors

    def psi1_overlap(self) -> complex:
        """``<psi_0^1|psi_1^1>``; its modulus equals ``lam``."""
        return complex(np.vdot(self.psi1[:, 0], self.psi1[:, 1]))


def qubit_family(lam: float) -> QubitFamily:
    params = make_params(2, lam)
    family = build_family(2, lam).transformed(_TO_BLOCH)
    return QubitFamily(params, angle_from_lambda(lam), family)


def qubit_checks(qf: QubitFamily) -> dict:
    """Residuals of the explicit qubit relations (all expected ~1e-15)."""
    lam, mu = qf.lam, qf.mu
    ops = qf.family.operators
    eye = np.eye(2)
    zx = ops.Z @ ops.X
    zx_eig = 1j * np.sqrt(mu) * (
        np.outer(qf.psi1[:, 0], qf.phi1[:, 0].conj()) - np.outer(qf.psi1[:, 1], qf.phi1[:, 1].conj())
    )
    return {
        "psi2_overlap": abs(np.vdot(qf.psi2[:, 0], qf.psi2[:, 1]) - lam),
        "phi2_overlap": abs(np.vdot(qf.phi2[:, 0], qf.phi2[:, 1]) + lam),
        "phi2_psi2": abs(np.vdot(qf.phi2[:, 0], qf.psi2[:, 0]) - 1 / np.sqrt(mu)),
        "psi1_overlap_modulus": abs(abs(qf.psi1_overlap()) - abs(lam)),
        "clock_square": frobenius(ops.Z @ ops.Z - eye),
        "shift_is_sigma_z": frobenius(ops.X - SIGMA_Z),
        "zx_spectral": frobenius(zx - zx_eig),
        "psi0_orthonormal": frobenius(adjoint(qf.psi0) @ qf.psi0 - eye),
        "angle_map": abs(lambda_from_angle(qf.alpha) - lam),
    }


def _check_angle(alpha: float) -> float:
    alpha = float(alpha)
    if not (np.isfinite(alpha) and 0 < alpha < 2 * np.pi):
        raise BadAngle(f"rotation angle {alpha!r} outside (0, 2*pi)")
    return alpha


def rotation(axis: str, alpha: float) -> np.ndarray:
    """``exp(i alpha sigma_axis / 4)``."""
    if axis not in ("x", "y"):
        raise BadIndex(f"rotation axis must be 'x' or 'y', got {axis!r}")
    return np.cos(alpha / 4) * np.eye(2) + 1j * np.sin(alpha / 4) * _PAULI[axis]


@dataclass(frozen=True)
class ProtocolObservable:
    axis: str
    k: int
    alpha: float
    matrix: np.ndarray


def rotation_observable(axis: str, k: int, alpha: float) -> ProtocolObservable:
    """``M_k(alpha) = R((-1)^k alpha) sigma_z R^H((-1)^k alpha)``."""
    alpha = _check_angle(alpha)
    if k not in (0, 1):
        raise BadIndex(f"k must be 0 or 1, got {k!r}")
    r = rotation(axis, (-1) ** k * alpha)
    return ProtocolObservable(axis, k, alpha, r @ SIGMA_Z @ adjoint(r))


def postselection_state(axis: str, k: int, alpha: float) -> np.ndarray:
    """``R^H((-1)^k alpha) |psi_0^0>``."""
    alpha = _check_angle(alpha)
    if k not in (0, 1):
        raise BadIndex(f"k must be 0 or 1, got {k!r}")
    return adjoint(rotation(axis, (-1) ** k * alpha)) @ NORTH


def _check_ks(k, s):
    if k not in (0, 1) or s not in (1, 2):
        raise BadIndex(f"need k in {{0, 1}} and s in {{1, 2}}, got k={k!r}, s={s!r}")


def protocol_weak_value(rho, k: int, s: int, qf: QubitFamily) -> complex:
    """Weak value from the rotated observable and its post-selection state.

    ``W_k^s = (mu / 2) <psi| (I - M_k) rho |psi>`` where ``psi`` is the
    post-selected state; ``(I - M_k) / 2`` is the projector onto ``phi_k^s``.
    """
    _check_ks(k, s)
    rho = as_matrix(rho)
    axis = _AXIS_FOR_BASIS[s]
    m = rotation_observable(axis, k, qf.alpha).matrix
    psi = postselection_state(axis, k, qf.alpha)
    return complex(0.5 * qf.mu * np.vdot(psi, (np.eye(2) - m) @ rho @ psi))


def bloch_geometry(k: int, s: int, qf: QubitFamily):
    """(operator weakly measured, post-selection state) for ``W_k^s``.

    The operator is the south-pole projector rotated by ``R((-1)^k alpha)``;
    the post-selection state is the north pole rotated the opposite way.
    """
    _check_ks(k, s)
    axis = _AXIS_FOR_BASIS[s]
    r = rotation(axis, (-1) ** k * qf.alpha)
    proj = r @ np.outer(SOUTH, SOUTH) @ adjoint(r)
    return proj, postselection_state(axis, k, qf.alpha)


def bloch_vector(obj) -> np.ndarray:
    """Bloch vector of a state vector or of a 2x2 operator.

    An operator with nonzero trace is normalized to unit trace first (so a
    projector gives the unit vector of the state it projects on); a traceless
    observable ``n.sigma`` gives ``n``.
    """
    a = np.asarray(obj, dtype=complex)
    if a.ndim == 1:
        a = np.outer(a, a.conj()) / np.vdot(a, a).real
    tr = np.trace(a).real
    norm = tr if abs(tr) > TOL.positive else 2.0
    return np.array([np.trace(a @ _PAULI[c]).real / norm for c in "xyz"])


def con2_residual(w01: complex, w02: complex, lam: float) -> complex:
    """Residual of the single complex relation between ``W_0^1`` and ``W_0^2``:

    ``(1+lam)[conj(W_0^2) - i conj(W_0^1)] - (1-lam)[W_0^2 - i W_0^1] - lam (1 - i)``.
    """
    w01, w02 = complex(w01), complex(w02)
    return (
        (1 + lam) * (w02.conjugate() - 1j * w01.conjugate())
        - (1 - lam) * (w02 - 1j * w01)
        - lam * (1 - 1j)
    )


def solve_con2(w02: complex, lam: float) -> complex:
    """``W_0^1`` determined by ``W_0^2`` through the relation above (``lam != 0``)."""
    if abs(lam) < TOL.positive:
        raise DegenerateCondition(
            "con2 degenerates at lambda = 0: it only forces the weak values to be real"
        )
    w02 = complex(w02)
    q = (1 - lam) * w02 + lam * (1 - 1j) - (1 + lam) * w02.conjugate()
    # the left side reduces to -2i lam Re(W) - 2 Im(W)
    return complex(-q.imag / (2 * lam), -q.real / 2)


def reconstruct_qubit(p00, p01, w1, w2, qf: QubitFamily) -> np.ndarray:
    """``rho = I/2 + c01 X + c10 Z + c11 ZX`` from ``p_0k`` and ``W_k^{1,2}``."""
    w1 = tuple(complex(w) for w in w1)
    w2 = tuple(complex(w) for w in w2)
    worst = max(abs(p00 + p01 - 1), abs(sum(w1) - 1), abs(sum(w2) - 1))
    if worst > TOL.completeness:
        raise IncompleteData(f"completeness violated by {worst:.3e}")
    ops = qf.family.operators
    c01 = 0.5 * (p00 - p01)
    c10 = 0.5 * (w2[0] - w2[1])
    c11 = 0.5j * (w1[1] - w1[0])
    return 0.5 * np.eye(2) + c01 * ops.X + c10 * ops.Z + c11 * (ops.Z @ ops.X)


@dataclass(frozen=True)
class ProtocolRun:
    rho_est: np.ndarray
    p0: tuple
    w1: tuple
    w2: tuple
    con2_residual: complex


def run_protocol(rho, lam: float, qf: QubitFamily | None = None) -> ProtocolRun:
    """Strong ``sigma_z`` plus one weak observable ``M_0^y``; the rest follows
    from completeness and con2."""
    if abs(lam) < TOL.positive:
        raise DegenerateCondition(
            "minimal protocol needs lambda != 0: con2 cannot fix W_0^1 at lambda = 0"
        )
    if not -1 < lam < 1:
        raise LambdaOutOfRange(f"lambda={lam!r} outside (-1, 1)")
    qf = qf or qubit_family(lam)
    rho = as_matrix(rho)
    p00 = float(np.vdot(NORTH, rho @ NORTH).real)
    p01 = float(np.vdot(SOUTH, rho @ SOUTH).real)
    w02 = protocol_weak_value(rho, 0, 2, qf)
    w01 = solve_con2(w02, lam)
    w1, w2 = (w01, 1 - w01), (w02, 1 - w02)
    est = reconstruct_qubit(p00, p01, w1, w2, qf)
    return ProtocolRun(est, (p00, p01), w1, w2, con2_residual(w01, w02, lam))


def minimal_protocol(rho, lam: float) -> np.ndarray:
    return run_protocol(rho, lam).rho_est
