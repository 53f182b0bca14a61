import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from angular_uncertainty import bounds
from angular_uncertainty.bounds import (
    BoundInputs,
    BoundKind,
    closed_form_W,
    continuous_optimum_x,
    curve,
    curve_csv,
    heisenberg_bound,
    omega_bound,
    optimal_l_continuous,
    pj_bound,
    pj_reference,
)
from angular_uncertainty.errors import InvalidInputError

finite = st.floats(min_value=0.0, max_value=1e4, allow_nan=False)


# frozen values, computed once from the closed form and cross-checked by search
@pytest.mark.parametrize(
    "L2, R, expected",
    [
        (3.0, 6.0, 2.574772708486752),
        (2.0, 0.0, 2.5),
        (2.0, 20.0, 2.0),
        (1.0, 0.5, 2.0485837703548633),
        (10.0, 50.0, 3.7700832253022187),
        (0.5, 100.0, 1.5340863524072437),
    ],
)
def test_omega_frozen(L2, R, expected):
    assert omega_bound(L2, R).value == pytest.approx(expected, abs=1e-14)
    assert omega_bound(L2, R).kind is BoundKind.OMEGA


def test_heisenberg_and_eigenstate():
    assert heisenberg_bound().value == 1.5
    assert [pj_bound(l).value for l in range(4)] == [1.5, 2.5, 3.5, 4.5]
    with pytest.raises(InvalidInputError):
        pj_bound(-1)


def test_zero_angular_momentum_gives_heisenberg():
    for R in (0.0, 1.0, 1e3, 1e6):
        assert omega_bound(0.0, R).value == 1.5


@given(st.floats(min_value=1e-6, max_value=1e4), finite)
def test_printed_form_agrees_with_simplified(L2, R):
    a = omega_bound(L2, R).value
    b = omega_bound(L2, R, form="printed").value
    assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


@given(st.floats(min_value=1e-6, max_value=1e4), finite)
def test_omega_between_heisenberg_and_eigenstate(L2, R):
    w = omega_bound(L2, R).value
    l = continuous_optimum_x(L2, 0.0)
    assert 1.5 <= w <= l + 1.5 + 1e-12


@given(st.floats(min_value=1e-3, max_value=1e3), finite, st.floats(min_value=1e-6, max_value=1e3))
def test_omega_nonincreasing_in_R(L2, R, dR):
    assert omega_bound(L2, R + dR).value <= omega_bound(L2, R).value + 1e-12


@given(st.floats(min_value=1e-3, max_value=1e3), finite, st.floats(min_value=1e-6, max_value=10))
def test_omega_nondecreasing_in_L2_at_fixed_F(L2, R, dL):
    F = R + L2**2
    R2 = F - (L2 + dL) ** 2
    if R2 >= 0:
        assert omega_bound(L2 + dL, R2).value >= omega_bound(L2, R).value - 1e-12


def test_optimal_x_integer_at_eigenvalues():
    for l in range(1, 10):
        x, frac = optimal_l_continuous(l * (l + 1), 0.0)
        assert x == pytest.approx(l, abs=1e-12)
        assert frac == 0.0
    with pytest.raises(InvalidInputError):
        continuous_optimum_x(0.0, 1.0)


def test_w_as_printed_spot_values():
    assert closed_form_W(2.0, 0.0).value == pytest.approx(3.0, abs=1e-12)
    assert closed_form_W(3.0, 6.0).value == pytest.approx(4.5, abs=1e-12)
    assert closed_form_W(2.0, 0.0).kind is BoundKind.W


@pytest.mark.parametrize("L2, R", [(-1.0, 0.0), (1.0, -0.1), (math.nan, 1.0), (1.0, math.inf)])
def test_invalid_inputs_rejected(L2, R):
    with pytest.raises(InvalidInputError):
        omega_bound(L2, R)
    with pytest.raises(InvalidInputError):
        BoundInputs(L2, R)


def test_unknown_form_rejected():
    with pytest.raises(InvalidInputError):
        omega_bound(1.0, 1.0, form="bogus")


def test_pj_reference():
    assert pj_reference(0.0) == pytest.approx(1.5)
    assert pj_reference(math.sqrt(2.0)) == pytest.approx(1.0 + math.sqrt(2.25))


def test_curve_rows_and_csv():
    rows = curve(1000.0, 0.0, 10.0, 11)
    assert len(rows) == 11
    assert rows[0].L == 0.0 and rows[0].omega == 1.5
    np.testing.assert_allclose([r.L for r in rows], np.linspace(0, 10, 11))
    text = curve_csv(rows)
    assert text.startswith("L,omega,pj_reference\n0,1.5,1.5\n")
    assert text.endswith("\n") and "\r" not in text
    assert len(text.splitlines()) == 12


def test_curve_rejects_bad_grid():
    with pytest.raises(InvalidInputError):
        curve(1.0, 2.0, 1.0, 10)
    with pytest.raises(InvalidInputError):
        curve(1.0, 0.0, 1.0, 1)


def test_format_number_is_stable():
    assert bounds.format_number(1.5) == "1.5"
    assert bounds.format_number(0.0) == "0"
    assert bounds.format_number(1.0 / 3.0) == "0.333333333333333"
