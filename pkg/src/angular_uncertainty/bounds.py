"""Closed-form lower bounds on the position-momentum product sigma_r * sigma_p.

Units: hbar = 1, so every bound is a dimensionless multiple of hbar.
``L2`` is the mean of L^2 and ``R`` its variance; ``F = R + L2**2`` is the
mean of L^4.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError

HEISENBERG = 1.5


class BoundKind(str, enum.Enum):
    HEISENBERG = "Heisenberg"
    EIGENSTATE = "Eigenstate"
    OMEGA = "Omega"
    W = "W"


@dataclass(frozen=True)
class BoundInputs:
    """Angular-momentum statistics a bound is conditioned on."""

    L2: float
    R: float

    def __post_init__(self):
        for name in ("L2", "R"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvalidInputError(f"{name} must be finite and >= 0, got {value!r}")

    @property
    def F(self) -> float:
        return self.R + self.L2 * self.L2


@dataclass(frozen=True)
class BoundValue:
    value: float
    kind: BoundKind

    def __float__(self) -> float:
        return float(self.value)


def heisenberg_bound() -> BoundValue:
    return BoundValue(HEISENBERG, BoundKind.HEISENBERG)


def pj_bound(l: int) -> BoundValue:
    """Bound l + 3/2 valid for eigenstates of L^2 with quantum number ``l``."""
    if isinstance(l, bool) or int(l) != l or l < 0:
        raise InvalidInputError(f"l must be a nonnegative integer, got {l!r}")
    return BoundValue(int(l) + HEISENBERG, BoundKind.EIGENSTATE)


def _omega_simplified(L2: float, F: float) -> float:
    # 3/2 + 2 L^3 / (s + L), s = sqrt(4F + L^2); no cancellation for large F
    L = math.sqrt(L2)
    s = math.sqrt(4.0 * F + L2)
    return HEISENBERG + 2.0 * L2 * L / (s + L)


def _omega_printed(L2: float, F: float) -> float:
    return HEISENBERG + L2 * L2 / (2.0 * F) * (math.sqrt(1.0 + 4.0 * F / L2) - 1.0)


def omega_bound(L2: float, R: float, form: str = "simplified") -> BoundValue:
    """Sharpened bound Omega(L2, R).

    ``form="printed"`` evaluates the textbook expression
    ``3/2 + (L2^2 / 2F) (sqrt(1 + 4F/L2) - 1)``; the default
    ``"simplified"`` form is algebraically identical and stable for large F.
    ``L2 == 0`` returns the limit 3/2.
    """
    inputs = BoundInputs(L2, R)
    if inputs.L2 == 0.0:
        return BoundValue(HEISENBERG, BoundKind.OMEGA)
    if form == "simplified":
        value = _omega_simplified(inputs.L2, inputs.F)
    elif form == "printed":
        value = _omega_printed(inputs.L2, inputs.F)
    else:
        raise InvalidInputError(f"unknown form {form!r}")
    return BoundValue(value, BoundKind.OMEGA)


def continuous_optimum_x(L2: float, R: float) -> float:
    """x = sqrt(4F + L2) / (2 sqrt(L2)) - 1/2, the real-valued optimal l1 = l2."""
    inputs = BoundInputs(L2, R)
    if inputs.L2 == 0.0:
        raise InvalidInputError("L2 = 0 has no angular structure")
    return 0.5 * math.sqrt(4.0 * inputs.F / inputs.L2 + 1.0) - 0.5


def optimal_l_continuous(L2: float, R: float) -> tuple[float, float]:
    """Return ``(l12, l3)``: the relaxed optimum has l1 = l2 = x and l3 = 0."""
    return continuous_optimum_x(L2, R), 0.0


def closed_form_W(L2: float, R: float) -> BoundValue:
    """The ceiling/floor refinement W(x), evaluated exactly as printed.

    Known to disagree with exhaustive integer search (it exceeds the true
    minimum at e.g. L2=2, R=0). Reported for auditing only; never use it
    to decide whether a state violates a bound.
    """
    inputs = BoundInputs(L2, R)
    x = continuous_optimum_x(inputs.L2, inputs.R)
    c = math.ceil(x)
    f = math.floor(x)
    numerator = inputs.L2 * ((1 + c) ** 2 + (1 + f) ** 2 + c * f - 1) - inputs.F
    return BoundValue(numerator / ((1 + c) * (1 + f)), BoundKind.W)


def pj_reference(L: float) -> float:
    """Eigenstate bound continued to real L: l + 3/2 at L = sqrt(l(l+1))."""
    return 1.0 + math.sqrt(L * L + 0.25)


class CurveRow(NamedTuple):
    L: float
    omega: float
    pj_reference: float


def curve(R: float, L_min: float, L_max: float, steps: int) -> list[CurveRow]:
    """Sample Omega(L^2, R) on a uniform grid of L (not L^2)."""
    if not (math.isfinite(R) and R >= 0):
        raise InvalidInputError(f"R must be >= 0, got {R!r}")
    if not (0 <= L_min < L_max) or not math.isfinite(L_max):
        raise InvalidInputError(f"need 0 <= L_min < L_max, got [{L_min}, {L_max}]")
    if isinstance(steps, bool) or int(steps) != steps or steps < 2:
        raise InvalidInputError(f"steps must be an integer >= 2, got {steps!r}")
    grid = np.linspace(L_min, L_max, int(steps))
    return [
        CurveRow(float(L), omega_bound(float(L) ** 2, R).value, pj_reference(float(L)))
        for L in grid
    ]


def format_number(value: float) -> str:
    """Positional notation, 15 significant digits, trailing zeros trimmed."""
    return np.format_float_positional(
        value, precision=15, unique=False, fractional=False, trim="-"
    )


def curve_csv(rows: list[CurveRow]) -> str:
    lines = ["L,omega,pj_reference"]
    lines.extend(",".join(format_number(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"
