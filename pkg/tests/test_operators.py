"""Core operator plumbing: decompositions, partial traces, parameter maps."""

import numpy as np
import pytest

from qmi.operators import (
    ConsistencyError,
    DensityOperator,
    as_probability,
    canonical_schatten,
    eigenbasis,
    hermitian_from_params,
    maximally_mixed,
    partial_trace,
    pure_state,
    purify,
    schatten_family,
    schatten_param_count,
    spectral,
    tensor_product,
    unitary_from_params,
)
from qmi.sampling import random_density, random_pure, random_unitary, rng_from


def test_density_operator_rejects_bad_input():
    with pytest.raises(ValueError):
        DensityOperator(np.array([[0.5, 0.3], [0.2, 0.5]]))  # not hermitian
    with pytest.raises(ValueError):
        DensityOperator(np.diag([0.9, 0.3]))  # trace 1.2
    with pytest.raises(ValueError):
        DensityOperator(np.diag([1.2, -0.2]))  # negative eigenvalue


def test_eigenbasis_descending_and_reconstructs():
    rng = rng_from(11)
    for _ in range(50):
        rho = random_density(4, rng)
        w, v = eigenbasis(rho.matrix)
        assert np.all(np.diff(w) <= 1e-12)
        np.testing.assert_allclose((v * w) @ v.conj().T, rho.matrix, atol=1e-12)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(4), atol=1e-12)


def test_eigenbasis_is_deterministic():
    rng = rng_from(12)
    rho = random_density(3, rng)
    w1, v1 = eigenbasis(rho.matrix)
    w2, v2 = eigenbasis(rho.matrix.copy())
    np.testing.assert_array_equal(w1, w2)
    np.testing.assert_array_equal(v1, v2)


def test_spectral_groups_degenerate_eigenvalues():
    rho = np.diag([0.4, 0.4, 0.2])
    dec = spectral(rho)
    assert dec.multiplicities == (2, 1)
    np.testing.assert_allclose(dec.reconstruct(), rho, atol=1e-12)
    np.testing.assert_allclose(np.trace(dec.projectors[0]), 2.0, atol=1e-12)


def test_canonical_schatten_reconstructs():
    rng = rng_from(13)
    for _ in range(50):
        rho = random_density(3, rng)
        dec = canonical_schatten(rho)
        np.testing.assert_allclose(dec.reconstruct(), rho.matrix, atol=1e-10)
        gram = dec.vectors.conj().T @ dec.vectors
        np.testing.assert_allclose(gram, np.eye(dec.size), atol=1e-10)


def test_schatten_family_rotates_only_degenerate_blocks():
    rng = rng_from(14)
    rho = DensityOperator(np.diag([0.5, 0.25, 0.25]))
    n = schatten_param_count(rho)
    assert n > 0
    for _ in range(20):
        dec = schatten_family(rho, rng.normal(size=n))
        np.testing.assert_allclose(dec.reconstruct(), rho.matrix, atol=1e-10)
    # nondegenerate spectra leave nothing to rotate
    assert schatten_param_count(DensityOperator(np.diag([0.5, 0.3, 0.2]))) == 0


def test_partial_trace_of_product_recovers_factors():
    rng = rng_from(15)
    for _ in range(20):
        a = random_density(2, rng).matrix
        b = random_density(3, rng).matrix
        joint = tensor_product(a, b)
        np.testing.assert_allclose(partial_trace(joint, (2, 3), keep=0), a, atol=1e-12)
        np.testing.assert_allclose(partial_trace(joint, (2, 3), keep=1), b, atol=1e-12)


def test_purification_marginals():
    rng = rng_from(16)
    for _ in range(20):
        rho = random_density(3, rng, rank=2)
        psi, anc = purify(rho.matrix)
        assert anc == 2
        joint = np.outer(psi, psi.conj())
        np.testing.assert_allclose(partial_trace(joint, (3, anc), keep=0), rho.matrix, atol=1e-10)


def test_parameter_maps_land_on_their_manifolds():
    rng = rng_from(17)
    for m in (2, 3):
        for _ in range(10):
            p = rng.normal(size=m * m)
            h = hermitian_from_params(p, m)
            np.testing.assert_allclose(h, h.conj().T, atol=1e-12)
            u = unitary_from_params(p, m)
            np.testing.assert_allclose(u.conj().T @ u, np.eye(m), atol=1e-12)
    # zero parameters give the identity rotation
    np.testing.assert_allclose(unitary_from_params(np.zeros(9), 3), np.eye(3), atol=1e-15)


def test_pure_state_and_mixed_helpers():
    v = np.array([3.0, 4.0])
    rho = pure_state(v)
    np.testing.assert_allclose(np.trace(rho.matrix), 1.0)
    np.testing.assert_allclose(rho.matrix, np.outer(v, v) / 25.0, atol=1e-12)
    np.testing.assert_allclose(maximally_mixed(3).matrix, np.eye(3) / 3)


def test_as_probability_validates():
    np.testing.assert_allclose(as_probability([0.25, 0.75]), [0.25, 0.75])
    with pytest.raises(ValueError):
        as_probability([0.7, 0.7])
    with pytest.raises(ValueError):
        as_probability([1.2, -0.2])


def test_unitary_roundtrip_through_random_basis():
    rng = rng_from(18)
    u = random_unitary(4, rng)
    v = random_pure(4, rng)
    np.testing.assert_allclose(np.linalg.norm(u @ v), 1.0, atol=1e-12)
