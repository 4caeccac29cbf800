"""Finite statistics: sampled probabilities, noisy weak values, a baseline
projective inversion and lambda sweeps comparing the schemes.

Every random draw comes from ``np.random.default_rng([seed, trial, stream])``
so a sweep is reproducible and independent of evaluation order. The same
trial index sees the same state and the same noise draws at every lambda.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass

import numpy as np

from .bases import Basis, BasisFamily, build_family, make_params
from .errors import ConfigError, DimensionMismatch, InvalidInput, NotOrthonormal
from .linalg import TOL, adjoint, frobenius
from .mub import mub_reconstruct, standard_mub_bases
from .tomography import (
    WeakValueTable,
    as_matrix,
    check_state,
    random_density_matrix,
    reconstruct,
    weak_values,
)

NOISE_KINDS = ("exact", "shot_strong", "weak_gaussian", "weak_gaussian_postselect")
SCHEMES = ("weak_biortho", "baseline_projective", "mub_orthogonal")
ENSEMBLES = ("ginibre", "pure", "maximally_mixed")

CSV_HEADER = (
    "p", "lambda", "scheme", "noise_kind", "shots", "scale", "trials",
    "mean_frob_err", "std_frob_err", "mean_fidelity", "mean_trace_dist",
    "min_eig_mean", "condition_number",
)


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "weak_gaussian_postselect"
    shots: int = 10_000
    scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ConfigError(f"unknown noise kind {self.kind!r}; choose from {', '.join(NOISE_KINDS)}")
        if isinstance(self.shots, bool) or int(self.shots) != self.shots or self.shots < 1:
            raise ConfigError(f"shots must be a positive integer, got {self.shots!r}")
        if not (np.isfinite(self.scale) and self.scale >= 0):
            raise ConfigError(f"noise scale must be finite and >= 0, got {self.scale!r}")
        object.__setattr__(self, "shots", int(self.shots))
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def sigma(self) -> float:
        """Per-component std ``c / sqrt(N)`` before any post-selection penalty."""
        return self.scale / np.sqrt(self.shots)

    def summary(self) -> dict:
        return {"kind": self.kind, "shots": self.shots, "scale": self.scale}


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _basis_vectors(basis) -> np.ndarray:
    return basis.vectors if isinstance(basis, Basis) else np.asarray(basis, dtype=complex)


def _exact_probabilities(rho, vecs) -> np.ndarray:
    q = np.einsum("ik,ij,jk->k", vecs.conj(), rho, vecs).real
    return np.clip(q, 0.0, None)


def sample_probabilities(rho, basis, shots: int, seed) -> np.ndarray:
    """Relative frequencies of a seeded multinomial draw in an orthonormal basis."""
    vecs = _basis_vectors(basis)
    dev = float(np.max(np.abs(adjoint(vecs) @ vecs - np.eye(vecs.shape[1]))))
    if dev > TOL.orthonormal:
        raise NotOrthonormal(f"basis Gram matrix deviates from I by {dev:.2e}")
    if int(shots) != shots or shots < 1:
        raise InvalidInput(f"shots must be a positive integer, got {shots!r}")
    q = _exact_probabilities(as_matrix(rho), vecs)
    counts = _rng(seed).multinomial(int(shots), q / q.sum())
    freq = counts / shots
    # put the rounding of the division into the last entry so the sum is 1
    freq[-1] = 1.0 - freq[:-1].sum()
    return freq


def _renormalize(values: np.ndarray) -> np.ndarray:
    """Project each row onto ``sum = 1`` by subtracting the mean excess."""
    return values - (values.sum(axis=-1, keepdims=True) - 1.0) / values.shape[-1]


def perturb_weak_values(table: WeakValueTable, model: NoiseModel, rng=None) -> WeakValueTable:
    """Additive complex Gaussian noise on every weak value.

    ``weak_gaussian`` uses std ``c/sqrt(N)`` per real component and
    ``weak_gaussian_postselect`` ``c sqrt(mu)/sqrt(N)``, the post-selection
    success rate being ``1/mu``. The other kinds leave the weak values alone.
    """
    if model.kind not in ("weak_gaussian", "weak_gaussian_postselect"):
        return table
    rng = _rng(model.seed if rng is None else rng)
    sigma = model.sigma
    if model.kind == "weak_gaussian_postselect":
        sigma *= np.sqrt(make_params(table.p, table.lam).mu)
    shape = table.W.shape
    noise = sigma * (rng.normal(size=shape) + 1j * rng.normal(size=shape))
    return WeakValueTable(table.p, table.lam, _renormalize(table.W + noise), table.p0.copy())


def _noisy_strong_probabilities(rho, vecs, model: NoiseModel, rng) -> np.ndarray:
    """Probabilities in the orthonormal basis ``vecs`` under ``model``."""
    if model.kind == "exact":
        return _exact_probabilities(rho, vecs)
    if model.kind == "shot_strong":
        return sample_probabilities(rho, vecs, model.shots, rng)
    q = _exact_probabilities(rho, vecs)
    return _renormalize(q + model.sigma * rng.normal(size=q.shape))


# --- baseline: least squares from non-orthogonal projective probabilities ----


def hermitian_basis(p: int) -> np.ndarray:
    """Orthonormal (Hilbert-Schmidt) traceless Hermitian basis, shape ``(p*p-1, p, p)``."""
    out = []
    for j in range(p):
        for k in range(j + 1, p):
            m = np.zeros((p, p), dtype=complex)
            m[j, k] = m[k, j] = 1 / np.sqrt(2)
            out.append(m)
            m = np.zeros((p, p), dtype=complex)
            m[j, k], m[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            out.append(m)
    for d in range(1, p):
        diag = np.zeros(p)
        diag[:d] = 1.0
        diag[d] = -d
        out.append(np.diag(diag / np.sqrt(d * (d + 1))) + 0j)
    return np.array(out)


def projective_design(family: BasisFamily):
    """Vectors measured by the baseline and its real design matrix.

    Row ``i`` maps the coordinates ``x`` of ``rho = I/p + sum_j x_j B_j`` to
    the probability ``<v_i|rho|v_i> - <v_i|v_i>/p``.
    """
    p = family.p
    vecs = np.concatenate([family.psi[s].vectors for s in range(p + 1)], axis=1)
    herm = hermitian_basis(p)
    design = np.einsum("ia,jik,ka->aj", vecs.conj(), herm, vecs).real
    return vecs, design


@dataclass(frozen=True)
class BaselineResult:
    rho_est: np.ndarray
    condition_number: float
    ill_conditioned: bool
    probabilities: np.ndarray


def condition_number(design) -> float:
    s = np.linalg.svd(np.asarray(design), compute_uv=False)
    return float(s[0] / s[-1]) if s[-1] > 0 else float("inf")


def baseline_projective_inversion(rho, family: BasisFamily, noise: NoiseModel | None = None,
                                  rng=None) -> BaselineResult:
    """Minimum-norm least-squares state from the ``p(p+1)`` values
    ``<psi_k^s|rho|psi_k^s>``, ``s = 0..p``.

    Shot noise for ``shot_strong`` is multinomial in the orthonormal basis and
    binomial for each non-orthogonal projector (a two-outcome measurement);
    the Gaussian kinds add ``c/sqrt(N)`` to every probability. A condition
    number above the ill-conditioning threshold is flagged, not raised.
    """
    rho = as_matrix(rho)
    p = family.p
    if rho.shape != (p, p):
        raise DimensionMismatch(f"state has shape {rho.shape} but the family is for p={p}")
    noise = noise or NoiseModel("exact")
    rng = _rng(noise.seed if rng is None else rng)
    vecs, design = projective_design(family)
    q = np.einsum("ia,ij,ja->a", vecs.conj(), rho, vecs).real
    if noise.kind == "shot_strong":
        q = q.copy()
        q[:p] = sample_probabilities(rho, vecs[:, :p], noise.shots, rng)
        q[p:] = rng.binomial(noise.shots, np.clip(q[p:], 0.0, 1.0)) / noise.shots
    elif noise.kind != "exact":
        q = q + noise.sigma * rng.normal(size=q.shape)
    est, cond = projective_inversion(q, family, vecs, design)
    return BaselineResult(est, cond, cond > TOL.ill_conditioned, q)


def projective_inversion(q, family: BasisFamily, vecs=None, design=None):
    """Least-squares state and design condition number for measured values ``q``
    ordered as ``(s, k)`` with ``s = 0..p``."""
    p = family.p
    if vecs is None or design is None:
        vecs, design = projective_design(family)
    q = np.asarray(q, dtype=float).ravel()
    if q.shape != (p * (p + 1),):
        raise DimensionMismatch(f"expected {p * (p + 1)} probabilities, got {q.size}")
    offset = np.einsum("ia,ia->a", vecs.conj(), vecs).real / p
    x, *_ = np.linalg.lstsq(design, q - offset, rcond=None)
    est = np.eye(p, dtype=complex) / p + np.einsum("j,jik->ik", x, hermitian_basis(p))
    return est, condition_number(design)


def synthesis_condition_number(family: BasisFamily) -> float:
    """Condition number of the real map from measured data ``(p_0k, Re W, Im W)``
    to the entries of the reconstructed matrix."""
    p = family.p
    cols = [family.projector(0, k) for k in range(p)]
    for s in range(1, p + 1):
        for k in range(p):
            pt = family.projector(s, k)
            cols += [pt, 1j * pt]
    m = np.array([np.concatenate([c.real.ravel(), c.imag.ravel()]) for c in cols]).T
    s = np.linalg.svd(m, compute_uv=False)
    rank = int(np.sum(s > s[0] * 1e-12))
    return float(s[0] / s[rank - 1])


def mub_condition_number(p: int) -> float:
    bases = standard_mub_bases(p)
    vecs = np.concatenate(bases, axis=1)
    m = np.einsum("ia,jik,ka->aj", vecs.conj(), hermitian_basis(p), vecs).real
    return condition_number(m)


# --- metrics -----------------------------------------------------------------


def _psd_sqrt(a):
    w, v = np.linalg.eigh(a)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ adjoint(v)


def metrics(rho_true, rho_est) -> dict:
    """Frobenius error, trace distance, fidelity (after clipping negative
    eigenvalues of the estimate and renormalizing) and the pre-clip minimum
    eigenvalue."""
    a, b = as_matrix(rho_true), as_matrix(rho_est)
    if a.shape != b.shape:
        raise DimensionMismatch(f"states have shapes {a.shape} and {b.shape}")
    check_state(a)
    b = 0.5 * (b + adjoint(b))
    delta = b - a
    w, v = np.linalg.eigh(b)
    clipped = np.clip(w, 0.0, None)
    b_pos = (v * (clipped / clipped.sum())) @ adjoint(v) if clipped.sum() > 0 else np.zeros_like(b)
    r = _psd_sqrt(a)
    inner = np.linalg.eigvalsh(r @ b_pos @ r)
    fid = float(np.sum(np.sqrt(np.clip(inner, 0.0, None))) ** 2)
    return {
        "frob_err": frobenius(delta),
        "trace_dist": float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(delta)))),
        "fidelity": min(fid, 1.0),
        "min_eig": float(w.min()),
        "clip": float(np.sum(np.clip(-w, 0.0, None))),
    }


# --- sweeps ------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    p: int
    lambda_grid: tuple
    schemes: tuple = ("weak_biortho", "baseline_projective")
    noise: tuple = (NoiseModel(),)
    trials: int = 100
    state_ensemble: str = "ginibre"
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.noise, NoiseModel):
            object.__setattr__(self, "noise", (self.noise,))
        object.__setattr__(self, "lambda_grid", tuple(float(x) for x in self.lambda_grid))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "noise", tuple(self.noise))
        if isinstance(self.trials, bool) or int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials must be an integer >= 1, got {self.trials!r}")
        if not self.lambda_grid:
            raise ConfigError("lambda grid is empty")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad or not self.schemes:
            raise ConfigError(f"unknown schemes {bad}; choose from {', '.join(SCHEMES)}")
        if self.state_ensemble not in ENSEMBLES:
            raise ConfigError(f"unknown state ensemble {self.state_ensemble!r}")


@dataclass(frozen=True)
class SweepRow:
    p: int
    lambda_: float
    scheme: str
    noise: dict
    trials: int
    mean_frob_err: float
    std_frob_err: float
    mean_fidelity: float
    mean_trace_dist: float
    min_eigenvalue_mean: float
    condition_number: float

    def csv_fields(self) -> list:
        f = lambda x: format(float(x), ".12g")  # noqa: E731
        return [
            str(self.p), f(self.lambda_), self.scheme, self.noise["kind"],
            str(self.noise["shots"]), f(self.noise["scale"]), str(self.trials),
            f(self.mean_frob_err), f(self.std_frob_err), f(self.mean_fidelity),
            f(self.mean_trace_dist), f(self.min_eigenvalue_mean), f(self.condition_number),
        ]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        return d


@dataclass(frozen=True)
class SweepResult:
    rows: tuple

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in self.rows:
            w.writerow(row.csv_fields())
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"rows": [r.to_dict() for r in self.rows]}, indent=1)

    def select(self, **match) -> list:
        out = []
        for r in self.rows:
            d = r.to_dict()
            d["noise_kind"] = r.noise["kind"]
            if all(d.get(k) == v for k, v in match.items()):
                out.append(r)
        return out


def _estimate_weak(rho, family, model, rng):
    table = weak_values(rho, family)
    p0 = _noisy_strong_probabilities(rho, family.psi[0].vectors, model, rng)
    table = perturb_weak_values(WeakValueTable(table.p, table.lam, table.W, p0), model, rng)
    est = reconstruct(table, family)
    # noisy weak values need not give a Hermitian matrix; keep its Hermitian part
    return 0.5 * (est + adjoint(est))


def _estimate_mub(rho, bases, model, rng):
    probs = np.array([_noisy_strong_probabilities(rho, b, model, rng) for b in bases])
    return mub_reconstruct(probs, bases)


def run_sweep(config: SweepConfig) -> SweepResult:
    """Rows ordered lambda, then scheme, then noise model."""
    p = config.p
    for lam in config.lambda_grid:
        make_params(p, lam)
    states = [
        random_density_matrix(p, np.random.default_rng([config.seed, t, 0]), config.state_ensemble)
        for t in range(config.trials)
    ]
    mub = standard_mub_bases(p) if "mub_orthogonal" in config.schemes else None
    rows = []
    for lam in config.lambda_grid:
        family = build_family(p, lam)
        for scheme in config.schemes:
            if scheme == "weak_biortho":
                cond = synthesis_condition_number(family)
            elif scheme == "baseline_projective":
                cond = condition_number(projective_design(family)[1])
            else:
                cond = mub_condition_number(p)
            for ni, model in enumerate(config.noise):
                stats = []
                for t, rho in enumerate(states):
                    rng = np.random.default_rng([config.seed, t, 1 + ni, model.seed])
                    if scheme == "weak_biortho":
                        est = _estimate_weak(rho, family, model, rng)
                    elif scheme == "baseline_projective":
                        est = baseline_projective_inversion(rho, family, model, rng).rho_est
                    else:
                        est = _estimate_mub(rho, mub, model, rng)
                    stats.append(metrics(rho, est))
                frob = np.array([m["frob_err"] for m in stats])
                rows.append(SweepRow(
                    p, lam, scheme, model.summary(), config.trials,
                    float(frob.mean()), float(frob.std()),
                    float(np.mean([m["fidelity"] for m in stats])),
                    float(np.mean([m["trace_dist"] for m in stats])),
                    float(np.mean([m["min_eig"] for m in stats])),
                    cond,
                ))
    return SweepResult(tuple(rows))
