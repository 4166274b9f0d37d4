from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardychain import hardy
from hardychain.errors import DimensionError, ValidationError
from hardychain.quantum import (
    IDENTITY2, PRIMED, UNPRIMED, X_AXIS, Z_AXIS, Event, MeasurementFrame, StateVector, default_frame, eigh,
    expectation, joint_probability, projector, random_axis, random_frame, random_state, tensor,
)

from oracles import pauli_projector, probability

unit_vectors = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: np.linalg.norm(v) > 1e-3).map(
    lambda v: np.asarray(v) / np.linalg.norm(v))


def test_projector_examples():
    np.testing.assert_array_equal(projector(Z_AXIS, 1), np.diag([1, 0]))
    np.testing.assert_allclose(projector(X_AXIS, 1), np.full((2, 2), 0.5))
    with pytest.raises(ValidationError):
        projector((1.0, 1.0, 0.0), 1)
    with pytest.raises(ValidationError):
        projector(Z_AXIS, 2)


@settings(max_examples=100, deadline=None)
@given(unit_vectors)
def test_projector_algebra(axis):
    p0, p1 = projector(axis, 0), projector(axis, 1)
    np.testing.assert_allclose(p0 + p1, IDENTITY2, atol=1e-15)
    np.testing.assert_allclose(p1 @ p1, p1, atol=1e-12)
    assert np.trace(p1).real == pytest.approx(1.0)
    assert np.linalg.matrix_rank(p1, tol=1e-9) == 1
    np.testing.assert_allclose(p1, pauli_projector(axis, 1), atol=1e-15)


def test_tensor_examples():
    np.testing.assert_array_equal(tensor([IDENTITY2, IDENTITY2]), np.eye(4))
    np.testing.assert_array_equal(tensor([np.diag([1, 0])] * 2), np.diag([1, 0, 0, 0]))
    assert np.trace(tensor([projector(Z_AXIS, 1), projector(X_AXIS, 1)])).real == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        tensor([])


def test_qubit_one_is_most_significant():
    # flip only qubit 1 of |000>: amplitude moves to index 0b100
    flip = tensor([np.array([[0, 1], [1, 0]]), IDENTITY2, IDENTITY2])
    v = np.zeros(8)
    v[0] = 1
    assert np.argmax(np.abs(flip @ v)) == 4


def test_state_vector_checks():
    with pytest.raises(DimensionError):
        StateVector(np.ones(3))
    s = StateVector(np.ones(4))
    assert not s.is_normalized
    with pytest.raises(ValidationError):
        s.require_normalized()
    assert s.normalized().is_normalized
    with pytest.raises(ValidationError):
        StateVector(np.zeros(2)).normalized()


def test_frame_and_event_validation():
    with pytest.raises(ValidationError):
        MeasurementFrame([(1, 0, 0.1)], [(1, 0, 0)])
    with pytest.raises(DimensionError):
        MeasurementFrame([Z_AXIS, Z_AXIS], [X_AXIS])
    with pytest.raises(ValidationError):
        Event.from_factors(3, [(1, "e"), (2, "ep")])
    assert Event.from_factors(3, [(1, "e"), (2, "ebar"), (3, "ep")]).describe() == "e1=1,e2=0,e'3=1"


def test_joint_probability_examples():
    n = 3
    z_minus = StateVector.product([[0, 1]] * n)
    assert joint_probability(z_minus, default_frame(n), Event.uniform(n, UNPRIMED, 0)) == 1.0
    g = hardy.GOLDEN
    params = hardy.LocalUnitaryParams((math.sqrt(g), 0.0, math.sqrt(g)), (g, 1.0, g))
    psi = hardy.construct_stationary_state_n3(params)
    p = joint_probability(psi, params.frame(), Event.uniform(3, PRIMED, 1))
    assert p == pytest.approx((5 * math.sqrt(5) - 11) / 2, abs=1e-12)


def test_joint_probability_requires_normalization():
    with pytest.raises(ValidationError):
        joint_probability(np.ones(4), default_frame(2), Event.uniform(2, UNPRIMED, 0))
    with pytest.raises(DimensionError):
        joint_probability(random_state(2, np.random.default_rng(0)), default_frame(3), Event.uniform(2, UNPRIMED, 0))


@pytest.mark.parametrize("n", range(1, 7))
def test_probability_normalization(n, rng):
    for _ in range(100 if n <= 4 else 20):
        psi = random_state(n, rng)
        frame = random_frame(n, rng)
        settings_ = [UNPRIMED if b else PRIMED for b in rng.integers(0, 2, n)]
        total = sum(joint_probability(psi, frame, Event(tuple(zip(settings_, outs))))
                    for outs in itertools.product([0, 1], repeat=n))
        assert total == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_joint_probability_matches_dense_oracle(n, rng):
    for _ in range(25):
        psi = random_state(n, rng)
        frame = random_frame(n, rng)
        cons = tuple((UNPRIMED if rng.integers(2) else PRIMED, int(rng.integers(2))) for _ in range(n))
        projs = [pauli_projector(frame.axis(q, s), o) for q, (s, o) in enumerate(cons, start=1)]
        p_oracle = probability(psi.amplitudes, projs)
        p_fast = joint_probability(psi, frame, Event(cons))
        p_dense = expectation(psi, tensor([frame.projector(q, s, o) for q, (s, o) in enumerate(cons, start=1)]))
        assert abs(p_fast - p_oracle) < 1e-12
        assert abs(p_fast - p_dense) < 1e-12


def test_expectation_examples(rng):
    psi = random_state(3, rng)
    assert expectation(psi, np.eye(8)) == pytest.approx(1.0)
    a = np.diag([3.0, 1.0, 2.0, 0.5])
    assert expectation(StateVector([0, 0, 1, 0]), a) == pytest.approx(2.0)
    with pytest.raises(DimensionError):
        expectation(psi, np.eye(4))
    with pytest.raises(ValidationError):
        expectation(StateVector(np.array([1, 1j]) / np.sqrt(2)), np.array([[0, 1], [0, 0]]))


def test_eigh_examples():
    vals, _ = eigh(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(vals, [1, 2, 3])
    vals, _ = eigh(projector(X_AXIS, 1))
    np.testing.assert_allclose(vals, [0, 1], atol=1e-14)
    with pytest.raises(ValidationError):
        eigh(np.array([[0, 1], [0, 0]]))


def test_random_axis_is_unit(rng):
    for _ in range(20):
        assert np.linalg.norm(random_axis(rng)) == pytest.approx(1.0, abs=1e-14)
