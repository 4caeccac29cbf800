from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weaktomo.bases import (
    Basis,
    BasisFamily,
    build_family,
    coordinate_monomial,
    derive_basis,
    dual_basis,
    family_from_dict,
    family_to_dict,
    lambda_bounds,
    load_family,
    make_equidistant_basis,
    make_params,
    omega_power,
    save_family,
    validate_family,
)
from weaktomo.errors import (
    LambdaOutOfRange,
    NotPrime,
    ValidationFailed,
    WrongDimension,
)
from weaktomo.linalg import adjoint, eig_general, gram_sqrt_vectors, mod_inverse


def test_params_examples():
    prm = make_params(2, 0.5)
    assert prm.mu == pytest.approx(4 / 3, abs=1e-12)
    assert prm.eta == pytest.approx(-0.5, abs=1e-12)
    prm = make_params(3, 0)
    assert (prm.mu, prm.eta) == (1.0, 0.0)
    # exact rational substitution as the oracle
    lam = Fraction(1, 2)
    mu = (1 + lam) / ((1 - lam) * (1 + 2 * lam))
    eta = -lam / (1 + lam)
    prm = make_params(3, 0.5)
    assert prm.mu == pytest.approx(float(mu), abs=1e-12)
    assert prm.eta == pytest.approx(float(eta), abs=1e-12)
    assert abs(prm.omega**3 - 1) < 1e-12


@pytest.mark.parametrize("p", [2, 3, 5])
def test_params_endpoints_rejected(p):
    lo, hi = lambda_bounds(p)
    for lam in (lo, hi, hi + 0.1, lo - 0.1, float("nan")):
        with pytest.raises(LambdaOutOfRange):
            make_params(p, lam)


def test_params_not_prime():
    for p in (1, 4, 9, 2.5, True):
        with pytest.raises(NotPrime):
            make_params(p, 0.1)


@pytest.mark.parametrize("p,lam", [(2, 0.0), (3, 0.5), (3, -0.4), (5, 0.99), (7, -0.15)])
def test_equidistant_gram(p, lam):
    psi = make_equidistant_basis(make_params(p, lam))
    g = psi.gram()
    assert np.max(np.abs(g - ((1 - lam) * np.eye(p) + lam))) < 1e-10
    # same as the eigendecomposition route of the kernel
    assert np.allclose(psi.vectors, gram_sqrt_vectors(g), atol=1e-12)


def test_dual_examples():
    psi = make_equidistant_basis(make_params(3, 0))
    assert np.allclose(dual_basis(psi).vectors, psi.vectors, atol=1e-14)
    prm = make_params(2, 0.5)
    psi = make_equidistant_basis(prm)
    phi = dual_basis(psi)
    assert np.allclose(adjoint(phi.vectors) @ psi.vectors, np.sqrt(3) / 2 * np.eye(2), atol=1e-10)
    prm = make_params(3, 0.5)
    phi = dual_basis(make_equidistant_basis(prm))
    off = np.abs(phi.gram())[~np.eye(3, dtype=bool)]
    assert np.allclose(off, 1 / 3, atol=1e-9)
    assert np.allclose(np.linalg.norm(phi.vectors, axis=0), 1, atol=1e-12)


@pytest.mark.parametrize("p,lam", [(3, 0.4), (5, 0.7), (7, -0.1)])
def test_dual_involution(p, lam):
    prm = make_params(p, lam)
    psi = make_equidistant_basis(prm)
    back = dual_basis(dual_basis(psi))
    ov = np.abs(np.einsum("ik,ik->k", back.vectors.conj(), psi.vectors))
    assert np.allclose(ov, 1, atol=1e-9)


def test_operators_orthogonal_limit():
    f = build_family(3, 0)
    w = np.exp(2j * np.pi / 3)
    assert np.allclose(f.operators.Z, np.diag([1, w, w * w]), atol=1e-12)
    assert np.allclose(f.operators.X, np.roll(np.eye(3), 1, axis=0), atol=1e-12)


def test_operators_nonunitary_clock():
    z = build_family(3, 0.3).operators.Z
    assert np.linalg.norm(np.linalg.matrix_power(z, 3) - np.eye(3)) < 1e-9
    assert np.linalg.norm(z @ adjoint(z) - np.eye(3)) > 1e-3
    x = build_family(5, 0.6).operators.X
    assert np.linalg.norm(x @ adjoint(x) - np.eye(5)) < 1e-9


def test_derive_basis_orthogonal_p3():
    f = build_family(3, 0)
    ops, prm = f.operators, f.params
    assert prm.inv2 == 2
    es = eig_general(ops.monomial(1, 1))
    expected = sorted(np.round(np.angle([omega_power(prm, 2 - k) for k in range(3)]), 9))
    assert sorted(np.round(np.angle(es.eigenvalues), 9)) == expected
    psi, _ = derive_basis(ops, prm, 1)
    assert np.allclose(psi.gram(), np.eye(3), atol=1e-10)
    zx = ops.monomial(1, 1)
    for k in range(3):
        assert np.linalg.norm(zx @ psi[k] - omega_power(prm, 2 - k) * psi[k]) < 1e-10


def test_derive_basis_unbiased_p3():
    f = build_family(3, 0.4)
    ov = np.abs(adjoint(f.phi[1].vectors) @ f.psi[2].vectors) ** 2
    assert np.allclose(ov, 1 / (3 * f.params.mu), atol=1e-9)


def test_derive_basis_completeness_p5():
    f = build_family(5, 0.3)
    for s in range(1, 5):
        assert np.linalg.norm(sum(f.projector(s, k) for k in range(5)) - np.eye(5)) < 1e-9


def test_derive_basis_rejects_qubit():
    f = build_family(2, 0.3)
    with pytest.raises(WrongDimension):
        derive_basis(f.operators, f.params, 1)


@pytest.mark.parametrize("p,lam", [(3, 0.3), (5, 0.6), (7, 0.9), (3, -0.3)])
def test_eigenvectors_satisfy_operator(p, lam):
    f = build_family(p, lam)
    prm, ops = f.params, f.operators
    for s in range(1, p):
        m = ops.monomial(s, 1)
        for k in range(p):
            val = omega_power(prm, prm.inv2 * s - k)
            assert np.linalg.norm(m @ f.psi[s][k] - val * f.psi[s][k]) < 1e-9
            assert np.linalg.norm(f.phi[s][k].conj() @ m - val * f.phi[s][k].conj()) < 1e-9


@pytest.mark.parametrize("p", [3, 5, 7])
def test_monomial_spectrum(p):
    f = build_family(p, 0.45)
    prm = f.params
    for t in range(1, p):
        for r in range(1, p):
            vals = eig_general(f.operators.monomial(t, r)).eigenvalues
            want = [omega_power(prm, (prm.inv2 * t - k) * r) for k in range(p)]
            dist = np.abs(np.subtract.outer(vals, want)).min(axis=1)
            assert dist.max() < 1e-9


def test_coordinate_monomial_is_unitary():
    prm = make_params(5, 0.8)
    for t in range(5):
        m = coordinate_monomial(prm, t, 1)
        assert np.allclose(m @ adjoint(m), np.eye(5))


def test_zero_basis_examples():
    f = build_family(3, 0.5)
    assert np.max(np.abs(f.psi[0].gram() - np.eye(3))) < 1e-10
    for m in range(3):
        assert np.linalg.norm(
            f.operators.X @ f.psi[0][m] - omega_power(f.params, -m) * f.psi[0][m]
        ) < 1e-9
    for s in range(1, 4):
        a = np.abs(adjoint(f.psi[0].vectors) @ f.psi[s].vectors) ** 2
        assert np.allclose(a[0], 2 / 3, atol=1e-9)
        assert np.allclose(a[1:], 1 / 6, atol=1e-9)


def test_build_family_examples():
    f = build_family(7, 0.2)
    assert validate_family(f).passed
    with pytest.raises(NotPrime):
        build_family(4, 0.2)


@pytest.mark.parametrize("p,lam", [(3, 0.4), (2, 0.9)])
def test_validate_passes(p, lam):
    rep = validate_family(build_family(p, lam))
    assert rep.passed and rep.max_residual <= 1e-9


def test_validate_tampered():
    f = build_family(3, 0.4)
    vecs = np.array(f.psi[2].vectors)
    vecs[:, 1] *= 1.01
    psi = dict(f.psi)
    psi[2] = Basis(2, "primal", vecs)
    rep = validate_family(BasisFamily(f.params, psi, f.phi, f.operators))
    assert not rep.passed
    assert rep.residuals["unit_norm"] == pytest.approx(1e-2, rel=1e-6)


@pytest.mark.parametrize("p,lam", [(3, 0.5), (5, -0.2), (7, 0.9)])
def test_equidistance_per_pair_phases(p, lam):
    f = build_family(p, lam)
    target = np.abs((1 - lam) * np.eye(p) + lam)
    for s in range(1, p + 1):
        assert np.max(np.abs(np.abs(f.psi[s].gram()) - target)) < 1e-8


def test_orthogonal_limit_hermitian_projectors():
    f = build_family(5, 0.0)
    for s in range(1, 6):
        for k in range(5):
            pr = f.projector(s, k)
            assert np.linalg.norm(pr - adjoint(pr)) < 1e-10
            assert np.linalg.norm(pr @ pr - pr) < 1e-10
    small = build_family(5, 1e-6)
    worst = max(np.linalg.norm(small.projector(s, k) - adjoint(small.projector(s, k)))
                for s in range(1, 6) for k in range(5))
    assert worst < 1e-5


def test_phase_convention():
    f = build_family(5, 0.4)
    for s in range(0, 5):
        v = f.psi[s].vectors
        assert np.all(np.abs(v[0].imag) < 1e-15) and np.all(v[0].real > 0)
    for s in range(1, 6):
        d = np.einsum("ik,ik->k", f.phi[s].vectors.conj(), f.psi[s].vectors)
        assert np.allclose(d, 1 / np.sqrt(f.params.mu), atol=1e-10)


def test_serialization_roundtrip(tmp_path):
    f = build_family(5, 0.35)
    path = tmp_path / "fam.json"
    save_family(f, path, validate_family(f))
    g = load_family(path)
    for s in f.psi:
        assert np.max(np.abs(f.psi[s].vectors - g.psi[s].vectors)) <= 1e-15
    for s in f.phi:
        assert np.max(np.abs(f.phi[s].vectors - g.phi[s].vectors)) <= 1e-15
    doc = family_to_dict(f)
    assert set(doc) >= {"p", "lambda", "eta", "mu", "bases"}


def test_deserialize_rejects_corrupt_family():
    doc = family_to_dict(build_family(3, 0.3))
    doc["bases"][1]["vectors"][0][0][0] += 0.05
    with pytest.raises(ValidationFailed) as info:
        family_from_dict(doc)
    assert info.value.failures


def test_transformed_family_keeps_identities():
    f = build_family(3, 0.6)
    rng = np.random.default_rng(5)
    u, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    assert validate_family(f.transformed(u)).residuals["duality"] < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.floats(0.0, 1.0, exclude_min=False, exclude_max=True))
def test_family_valid_across_range(p, u):
    lo, hi = lambda_bounds(p)
    lam = lo + (hi - lo) * (0.02 + 0.96 * u)
    rep = validate_family(build_family(p, lam))
    assert rep.passed, rep.failures()


@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_inv2(p):
    assert (2 * make_params(p, 0.1).inv2) % p == 1 == (2 * mod_inverse(2, p)) % p
