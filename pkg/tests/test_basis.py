import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from angular_uncertainty.basis import (
    QuantumNumbers,
    SuperpositionState,
    angular_stats,
    example_state,
    moments_single,
    moments_superposition,
    p2_element,
    p2_matrix,
    r2_element,
    r2_matrix,
)
from angular_uncertainty.errors import InvalidInputError


def Q(n, l, m=0):
    return QuantumNumbers(n, l, m)


def test_quantum_number_validation():
    assert Q(2, 3, -1).energy == 8.5
    for bad in [(-1, 0, 0), (0, -1, 0), (0, 1, 2), (0.5, 1, 0), (True, 0, 0)]:
        with pytest.raises(InvalidInputError):
            QuantumNumbers(*bad)


def test_state_validation():
    with pytest.raises(InvalidInputError):
        SuperpositionState(())
    with pytest.raises(InvalidInputError):
        SuperpositionState(((Q(0, 0), 0.9),))
    with pytest.raises(InvalidInputError):
        SuperpositionState(((Q(0, 0), 0.6), (Q(0, 0), 0.8)))
    with pytest.raises(InvalidInputError):
        SuperpositionState.from_amplitudes([Q(0, 0)], [0.0], normalize=True)


# frozen matrix elements: standard Laguerre sign convention
def test_matrix_elements_frozen():
    assert r2_element(Q(0, 0), Q(0, 0)) == 1.5
    assert r2_element(Q(0, 0), Q(1, 0)) == pytest.approx(-math.sqrt(1.5), abs=1e-15)
    assert r2_element(Q(1, 3), Q(2, 3)) == pytest.approx(-math.sqrt(11.0), abs=1e-15)
    assert p2_element(Q(2, 3), Q(1, 3)) == pytest.approx(math.sqrt(11.0), abs=1e-15)
    assert r2_element(Q(0, 0), Q(2, 0)) == 0.0
    assert r2_element(Q(0, 1, 0), Q(0, 1, 1)) == 0.0
    assert p2_element(Q(0, 1), Q(0, 2)) == 0.0


@given(st.integers(0, 6), st.integers(0, 6))
def test_forms_symmetric_and_sum_to_twice_hamiltonian(n_max, l_max):
    labels = [Q(n, l) for l in range(l_max + 1) for n in range(n_max + 1)]
    A, B = r2_matrix(labels), p2_matrix(labels)
    np.testing.assert_allclose(A, A.T, atol=1e-14)
    np.testing.assert_allclose(B, B.T, atol=1e-14)
    np.testing.assert_allclose(A + B, np.diag([2 * q.energy for q in labels]), atol=1e-13)


def test_eigenstate_moments():
    m = moments_single(Q(1, 2))
    assert (m.r2, m.p2, m.product) == (5.5, 5.5, 5.5)
    s = SuperpositionState.eigenstate(1, 2)
    assert moments_superposition(s).product == pytest.approx(5.5, abs=1e-14)


def test_two_n_superposition_frozen():
    s = SuperpositionState.from_amplitudes([Q(0, 0), Q(1, 0)], [1, 1], normalize=True)
    m = moments_superposition(s)
    assert m.r2 == pytest.approx(2.5 - math.sqrt(1.5), abs=1e-14)
    assert m.p2 == pytest.approx(2.5 + math.sqrt(1.5), abs=1e-14)
    assert m.product == pytest.approx(math.sqrt(6.25 - 1.5), abs=1e-14)


def test_zero_mean_guard():
    mixed = SuperpositionState.from_amplitudes([Q(0, 0), Q(0, 1)], [1, 1], normalize=True)
    assert not mixed.means_vanish
    with pytest.raises(InvalidInputError):
        moments_superposition(mixed)
    # l values 0 and 3 cannot be connected by position or momentum
    two = SuperpositionState.from_amplitudes([Q(0, 0), Q(0, 3)], [1, 1], normalize=True)
    assert two.means_vanish and not two.parity_pure
    even = SuperpositionState.from_amplitudes([Q(0, 0), Q(0, 2), Q(1, 4)], [1, 1, 1], normalize=True)
    assert even.parity_pure and even.means_vanish


def test_angular_stats_frozen():
    s = SuperpositionState.from_amplitudes([Q(0, 2), Q(0, 1), Q(0, 0)],
                                           np.sqrt([0.375, 0.375, 0.25]))
    st_ = angular_stats(s)
    assert st_.L2_mean == pytest.approx(3.0, abs=1e-14)
    assert st_.F == pytest.approx(15.0, abs=1e-13)
    assert st_.R == pytest.approx(6.0, abs=1e-13)


@pytest.mark.parametrize("l0", range(2, 13))
def test_example_family(l0):
    a = l0 * (l0 + 1)
    for L2 in (0.5, 1.0, 2.0, a - 0.5):
        s = example_state(l0, L2)
        assert moments_superposition(s).product == pytest.approx(1.5 + L2 / (l0 + 1), abs=1e-12)
        stats = angular_stats(s)
        assert stats.L2_mean == pytest.approx(L2, abs=1e-12)
        assert stats.R == pytest.approx(L2 * (a - L2), abs=1e-12 * max(1.0, a * a))


@pytest.mark.parametrize("l0, L2", [(1, 1.0), (2, 0.0), (2, 6.0), (3, -1.0), (2.5, 1.0)])
def test_example_state_rejects(l0, L2):
    with pytest.raises(InvalidInputError):
        example_state(l0, L2)


@given(
    st.lists(st.tuples(st.integers(0, 3), st.integers(0, 4)), min_size=1, max_size=5, unique=True),
    st.data(),
)
def test_json_round_trip(pairs, data):
    labels = [Q(n, l, data.draw(st.integers(-l, l))) for n, l in pairs]
    amps = [complex(data.draw(st.floats(-1, 1)), data.draw(st.floats(-1, 1))) for _ in labels]
    if sum(abs(c) ** 2 for c in amps) < 1e-6:
        amps[0] = 1.0
    s = SuperpositionState.from_amplitudes(labels, amps, normalize=True)
    assert SuperpositionState.from_json(s.to_json()) == s


def test_from_json_malformed():
    with pytest.raises(InvalidInputError):
        SuperpositionState.from_json_obj([{"n": 0, "l": 0}])
