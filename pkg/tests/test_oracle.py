import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import eval_genlaguerre

from angular_uncertainty import oracle
from angular_uncertainty.basis import QuantumNumbers, SuperpositionState, moments_superposition
from angular_uncertainty.errors import InvalidInputError, QuadratureError
from angular_uncertainty.oracle import (
    Parity,
    QuadratureConfig,
    genlaguerre,
    p2_quadrature,
    quadrature_moments,
    r2_quadrature,
    radial_overlap,
    radial_wavefunction,
    random_state,
    scan,
)

Q = QuantumNumbers


def test_genlaguerre_frozen():
    np.testing.assert_allclose(genlaguerre(3, 0.5, [0.0, 1.0, 2.5]),
                               [2.1875, -0.6041666666666666, -0.4166666666666667], atol=1e-14)
    assert np.all(genlaguerre(-1, 0.5, [1.0, 2.0]) == 0.0)


@given(st.integers(0, 25), st.floats(0.5, 40.5), st.floats(0.0, 60.0))
def test_genlaguerre_matches_scipy(n, alpha, x):
    ref = eval_genlaguerre(n, alpha, x)
    assert genlaguerre(n, alpha, x) == pytest.approx(ref, rel=1e-9, abs=1e-9 * (1 + abs(ref)))


def test_radial_wavefunction_frozen():
    np.testing.assert_allclose(radial_wavefunction(Q(1, 2), [0.5, 1.0, 2.0]),
                               [0.29732363, 0.62876106, -0.11223645], atol=1e-8)


@pytest.mark.parametrize("n, l", [(0, 0), (2, 1), (5, 7)])
def test_normalization_against_adaptive_quad(n, l):
    q = Q(n, l)
    val, _ = quad(lambda r: radial_wavefunction(q, r) ** 2 * r * r, 0, np.inf, limit=200)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_normalization_and_orthogonality_grid():
    cfg = QuadratureConfig()
    for l in range(0, 31, 3):
        for n in range(0, 21, 4):
            a = Q(n, l)
            assert abs(radial_overlap(a, a, cfg) - 1.0) < 1e-12
            for n2 in range(n + 1, 21, 5):
                assert abs(radial_overlap(a, Q(n2, l), cfg)) < 1e-12


def test_hermiticity():
    for l in (0, 3, 8):
        for n in range(5):
            for n2 in range(5):
                a, b = Q(n, l), Q(n2, l)
                assert abs(r2_quadrature(a, b) - r2_quadrature(b, a)) < 1e-12
                assert abs(p2_quadrature(a, b) - p2_quadrature(b, a)) < 1e-12


def test_frozen_quadrature_elements():
    assert r2_quadrature(Q(0, 0), Q(1, 0)) == pytest.approx(-math.sqrt(1.5), abs=1e-13)
    assert p2_quadrature(Q(2, 3), Q(1, 3)) == pytest.approx(math.sqrt(11.0), abs=1e-13)
    assert p2_quadrature(Q(0, 1), Q(0, 2)) == 0.0


def test_config_validation():
    with pytest.raises(InvalidInputError):
        QuadratureConfig(nodes=32)
    with pytest.raises(InvalidInputError):
        QuadratureConfig(nodes=64, max_power=200)
    assert QuadratureConfig(nodes=64).doubled().nodes == 128


def test_quadrature_moments_example_state():
    from angular_uncertainty.basis import example_state
    m = quadrature_moments(example_state(3, 2.0))
    assert m.product == pytest.approx(2.0, abs=1e-10)


def test_quadrature_guards():
    mixed = SuperpositionState.from_amplitudes([Q(0, 0), Q(0, 1)], [1, 1], normalize=True)
    with pytest.raises(InvalidInputError):
        quadrature_moments(mixed)
    with pytest.raises(InvalidInputError):
        quadrature_moments(SuperpositionState.eigenstate(21, 0))


def test_convergence_failure_detected(monkeypatch):
    calls = iter([(1.0, 1.0), (1.1, 1.0)])
    monkeypatch.setattr(oracle, "_moments_at", lambda s, cfg: next(calls))
    with pytest.raises(QuadratureError):
        quadrature_moments(SuperpositionState.eigenstate(0, 0))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(list(Parity)), st.integers(1, 5), st.integers(0, 2**31))
def test_random_states_quadrature_vs_analytic(parity, terms, seed):
    s = random_state(4, 8, parity, terms, seed)
    assert s.parity_pure
    assert {q.l % 2 for q in s.labels} == {0 if parity is Parity.EVEN else 1}
    a = moments_superposition(s)
    q = quadrature_moments(s)
    assert abs(a.r2 - q.r2) < 1e-8 and abs(a.p2 - q.p2) < 1e-8


def test_random_state_deterministic_and_validated():
    assert random_state(2, 4, "even", 3, 7) == random_state(2, 4, "even", 3, 7)
    with pytest.raises(InvalidInputError):
        random_state(0, 0, "even", 2, 1)
    with pytest.raises(ValueError):
        random_state(1, 1, "both", 1, 1)


def test_scan_small_frozen():
    r = scan(300, 4, 8, 5, 42)
    assert r.samples == 300 and r.violations == 0 and r.seed == 42
    assert r.worst_margin >= -1e-8
    assert scan(300, 4, 8, 5, 42).to_dict() == r.to_dict()
    assert scan(0, 1, 1, 1, 0).worst_state is None
