"""Capacity searches: state families, cqc chain modes, structural floors."""

import math

import numpy as np
import pytest

from qmi.capacity import (
    CodingScheme,
    CqcInstance,
    StateFamily,
    cqc_capacity,
    cqc_mutual_entropy,
    pseudo_capacity,
    quantum_capacity,
)
from qmi.channels import amplitude_damping_channel, depolarizing_channel, identity_channel, projective_povm
from qmi.operators import DensityOperator
from qmi.sampling import rng_from
from qmi.search import SearchBudget

TINY = SearchBudget(restarts=2, max_evals=40, seed=5, tol=1e-6)

BASIS_CODING = CodingScheme(
    (DensityOperator(np.diag([1.0, 0.0])), DensityOperator(np.diag([0.0, 1.0])))
)


def test_state_family_parameterizations_are_valid_states():
    rng = rng_from(51)
    for family in (StateFamily("full", 2), StateFamily("rank", 3, 2), StateFamily("diagonal", 3)):
        for _ in range(20):
            rho = family.state_from_params(rng.normal(size=family.n_params))
            if rho is None:
                continue
            assert abs(float(np.trace(rho.matrix).real) - 1.0) < 1e-9
        for start in family.candidate_starts():
            assert start.shape == (family.n_params,)
            assert family.state_from_params(start) is not None


def test_diagonal_family_spans_the_simplex():
    family = StateFamily("diagonal", 3)
    rho = family.state_from_params(np.array([2.0, 0.0, -2.0]))
    np.testing.assert_allclose(rho.matrix, np.diag(np.diag(rho.matrix)), atol=1e-12)


def test_cqc_instance_validates_dimensions():
    with pytest.raises(ValueError):
        CqcInstance(
            weights=np.array([0.5, 0.5]),
            coding=BASIS_CODING,
            channel=identity_channel(3),
            decoding=projective_povm(3),
        )
    with pytest.raises(ValueError):
        CqcInstance(
            weights=np.array([0.5, 0.25, 0.25]),
            coding=BASIS_CODING,
            channel=identity_channel(2),
            decoding=projective_povm(2),
        )


def test_cqc_mutual_entropy_routes_agree():
    inst = CqcInstance(
        weights=np.array([0.3, 0.7]),
        coding=BASIS_CODING,
        channel=amplitude_damping_channel(0.2),
        decoding=projective_povm(2),
    )
    got = cqc_mutual_entropy(inst)
    assert got.defect < 1e-8
    assert 0.0 <= got.value <= math.log(2.0)


def test_noiseless_orthogonal_cqc_capacity_is_ln2():
    rep = cqc_capacity(identity_channel(2), projective_povm(2), BASIS_CODING, "weights", TINY)
    assert abs(rep.value - math.log(2.0)) < 1e-5


def test_cqc_modes_are_monotone():
    ch = amplitude_damping_channel(0.3)
    povm = projective_povm(2)
    w = cqc_capacity(ch, povm, BASIS_CODING, "weights", TINY)
    c = cqc_capacity(ch, povm, BASIS_CODING, "coding", TINY)
    f = cqc_capacity(ch, povm, BASIS_CODING, "full", TINY)
    assert w.value <= c.value + 1e-9
    assert c.value <= f.value + 1e-9
    assert f.value <= math.log(2.0) + 2 * TINY.tol


def test_cqc_rejects_unknown_mode():
    with pytest.raises(ValueError):
        cqc_capacity(identity_channel(2), projective_povm(2), BASIS_CODING, "everything", TINY)


def test_identity_capacity_is_log_dim():
    rep = quantum_capacity(identity_channel(2), StateFamily("full", 2), TINY)
    assert abs(rep.value - math.log(2.0)) < 1e-6
    assert rep.maximizer["state"] is not None


def test_depolarizing_capacity_between_zero_and_identity():
    rep = quantum_capacity(depolarizing_channel(0.5, 2), StateFamily("full", 2), TINY)
    assert -1e-9 < rep.value < math.log(2.0)


def test_pseudo_capacity_floors_at_quantum():
    small = SearchBudget(restarts=2, max_evals=12, seed=5, tol=1e-6)
    ch = amplitude_damping_channel(0.3)
    family = StateFamily("full", 2)
    quantum = quantum_capacity(ch, family, small)
    pseudo = pseudo_capacity(ch, family, 2, small)
    assert pseudo.value >= quantum.value - 1e-9
    assert pseudo.notes["quantum_capacity"] <= pseudo.value + 1e-9


def test_capacity_reports_carry_evals():
    rep = quantum_capacity(identity_channel(2), StateFamily("diagonal", 2), TINY)
    assert rep.evals > 0
    assert abs(rep.value - math.log(2.0)) < 1e-6
