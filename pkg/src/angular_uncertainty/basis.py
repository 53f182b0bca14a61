"""Exact moment algebra over isotropic harmonic-oscillator eigenstates.

Oscillator units (hbar = m = omega = 1). Eigenstates |n l m> have energy
2n + l + 3/2 and radial functions built from standard Laguerre polynomials
(L_n^a(0) > 0), which fixes the sign of the off-diagonal r^2 elements:

    <n+1 l m| r^2 |n l m> = -sqrt((n+1)(n+l+3/2))

p^2 = 2H - r^2, so its off-diagonal elements carry the opposite sign.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError

NORM_TOL = 1e-12


@dataclass(frozen=True, order=True)
class QuantumNumbers:
    n: int
    l: int
    m: int = 0

    def __post_init__(self):
        for name in ("n", "l", "m"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InvalidInputError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.n < 0 or self.l < 0 or abs(self.m) > self.l:
            raise InvalidInputError(f"invalid quantum numbers (n={self.n}, l={self.l}, m={self.m})")

    @property
    def energy(self) -> float:
        return 2 * self.n + self.l + 1.5


@dataclass(frozen=True)
class SuperpositionState:
    """Normalized finite superposition sum_i c_i |n_i l_i m_i>."""

    terms: tuple[tuple[QuantumNumbers, complex], ...]

    def __post_init__(self):
        terms = tuple((q, complex(c)) for q, c in self.terms)
        if not terms:
            raise InvalidInputError("a state needs at least one term")
        labels = [q for q, _ in terms]
        if len(set(labels)) != len(labels):
            raise InvalidInputError("repeated (n, l, m) label in superposition")
        norm = sum(abs(c) ** 2 for _, c in terms)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidInputError(f"state is not normalized: sum |c|^2 = {norm!r}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_amplitudes(
        cls, labels: Iterable[QuantumNumbers | tuple[int, int, int]], amplitudes: Iterable[complex],
        normalize: bool = False,
    ) -> "SuperpositionState":
        qs = [q if isinstance(q, QuantumNumbers) else QuantumNumbers(*q) for q in labels]
        cs = np.asarray(list(amplitudes), dtype=complex)
        if len(qs) != len(cs):
            raise InvalidInputError("labels and amplitudes differ in length")
        if normalize:
            norm = float(np.sqrt(np.sum(np.abs(cs) ** 2)))
            if norm == 0.0:
                raise InvalidInputError("cannot normalize a zero vector")
            cs = cs / norm
        return cls(tuple(zip(qs, (complex(c) for c in cs))))

    @classmethod
    def eigenstate(cls, n: int, l: int, m: int = 0) -> "SuperpositionState":
        return cls(((QuantumNumbers(n, l, m), 1.0 + 0.0j),))

    @property
    def labels(self) -> list[QuantumNumbers]:
        return [q for q, _ in self.terms]

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([c for _, c in self.terms], dtype=complex)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def parity_pure(self) -> bool:
        return len({q.l % 2 for q in self.labels}) == 1

    @property
    def means_vanish(self) -> bool:
        """True when <r> = <p> = 0 is guaranteed exactly.

        Position and momentum only connect l to l +/- 1, so any state
        without such a pair (every parity-pure state, and two-level
        states like |0 0 0> + |0 l0 0> with l0 > 1) has vanishing means.
        """
        ls = sorted({q.l for q in self.labels})
        return self.parity_pure or all(abs(a - b) != 1 for a, b in combinations(ls, 2))

    def to_json_obj(self) -> list[dict]:
        return [
            {"n": q.n, "l": q.l, "m": q.m, "re": c.real, "im": c.imag}
            for q, c in self.terms
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: Sequence[dict]) -> "SuperpositionState":
        try:
            terms = tuple(
                (QuantumNumbers(int(t["n"]), int(t["l"]), int(t["m"])),
                 complex(float(t["re"]), float(t["im"])))
                for t in obj
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed state JSON: {exc}") from exc
        return cls(terms)

    @classmethod
    def from_json(cls, text: str) -> "SuperpositionState":
        return cls.from_json_obj(json.loads(text))


@dataclass(frozen=True)
class AngularStats:
    L2_mean: float
    L4_mean: float
    R: float
    F: float


@dataclass(frozen=True)
class MomentReport:
    r2: float
    p2: float
    sigma_r: float
    sigma_p: float
    product: float

    @classmethod
    def from_second_moments(cls, r2: float, p2: float) -> "MomentReport":
        # zero-mean frame: sigma is the root of the second moment
        sigma_r = math.sqrt(r2)
        sigma_p = math.sqrt(p2)
        return cls(r2, p2, sigma_r, sigma_p, math.sqrt(r2 * p2))


def r2_element(a: QuantumNumbers, b: QuantumNumbers) -> float:
    if a.l != b.l or a.m != b.m:
        return 0.0
    if a.n == b.n:
        return a.energy
    if abs(a.n - b.n) == 1:
        n = min(a.n, b.n)
        return -math.sqrt((n + 1) * (n + a.l + 1.5))
    return 0.0


def p2_element(a: QuantumNumbers, b: QuantumNumbers) -> float:
    if a.l != b.l or a.m != b.m:
        return 0.0
    if a.n == b.n:
        return a.energy
    return -r2_element(a, b)


def r2_matrix(labels: Sequence[QuantumNumbers]) -> np.ndarray:
    return np.array([[r2_element(a, b) for b in labels] for a in labels])


def p2_matrix(labels: Sequence[QuantumNumbers]) -> np.ndarray:
    return np.array([[p2_element(a, b) for b in labels] for a in labels])


def _require_zero_means(s: SuperpositionState) -> None:
    if not s.means_vanish:
        raise InvalidInputError(
            "state mixes l and l+1 components; <r> and <p> are not guaranteed to vanish"
        )


def moments_single(q: QuantumNumbers) -> MomentReport:
    e = q.energy
    return MomentReport(e, e, math.sqrt(e), math.sqrt(e), e)


def moments_superposition(s: SuperpositionState) -> MomentReport:
    """Second moments of a zero-mean superposition from exact matrix elements."""
    _require_zero_means(s)
    c = s.amplitudes
    labels = s.labels
    r2 = float(np.real(np.conj(c) @ r2_matrix(labels) @ c))
    p2 = float(np.real(np.conj(c) @ p2_matrix(labels) @ c))
    return MomentReport.from_second_moments(r2, p2)


def angular_stats(s: SuperpositionState) -> AngularStats:
    probs = s.probabilities
    a = np.array([q.l * (q.l + 1) for q in s.labels], dtype=float)
    L2 = float(probs @ a)
    L4 = float(probs @ a**2)
    R = float(probs @ (a - L2) ** 2)
    return AngularStats(L2_mean=L2, L4_mean=L4, R=R, F=L4)


def example_state(l0: int, L2: float) -> SuperpositionState:
    """Two-level state sqrt(1 - L2/a) |0 0 0> + sqrt(L2/a) |0 l0 0>, a = l0(l0+1).

    Has <L^2> = L2, variance L2 (a - L2) and product 3/2 + L2/(l0 + 1).
    """
    if isinstance(l0, bool) or int(l0) != l0 or l0 <= 1:
        raise InvalidInputError(f"l0 must be an integer > 1, got {l0!r}")
    l0 = int(l0)
    a = l0 * (l0 + 1)
    if not (0 < L2 < a):
        raise InvalidInputError(f"need 0 < L2 < l0(l0+1) = {a}, got {L2!r}")
    weight = L2 / a
    return SuperpositionState((
        (QuantumNumbers(0, 0, 0), complex(math.sqrt(1.0 - weight))),
        (QuantumNumbers(0, l0, 0), complex(math.sqrt(weight))),
    ))
