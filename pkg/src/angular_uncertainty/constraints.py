"""Three-level variational solutions under <L^2> and <L^4> constraints.

A triple l1 >= l2 >= l3 (all at n = 0) carries probabilities p_i fixed by

    sum p_i = 1,   sum p_i a_i = L2,   sum p_i a_i^2 = F,   a_i = l_i(l_i + 1),

and gives the candidate bound omega = 3/2 + sum p_i (2 n_i + l_i). The
smallest omega over integer triples is the tightest bound this construction
yields; Omega(L2, R) is its continuous relaxation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from .bounds import (
    BoundInputs,
    closed_form_W,
    continuous_optimum_x,
    omega_bound,
)
from .errors import InfeasibleError, InvalidInputError

PROB_TOL = 1e-12
DEGENERATE_F_TOL = 1e-9
TIE_TOL = 1e-12
SAT_TOL = 1e-10


class Domain(str, enum.Enum):
    DOM1 = "Dom1"
    DOM2 = "Dom2"
    DEGENERATE = "Degenerate"
    INFEASIBLE = "Infeasible"


class UnderdeterminedError(InvalidInputError):
    """Triple has repeated l values; the multiplier system is rank deficient."""


@dataclass(frozen=True)
class Multipliers:
    eta: float
    Lambda: float
    energy: float
    residual: float


@dataclass(frozen=True)
class TripleSolution:
    l1: int
    l2: int
    l3: int
    L2: float
    F: float
    probs: tuple[float, float, float]
    omega: float
    feasible: bool
    domain: Domain
    multipliers: Multipliers | None = field(default=None)

    @property
    def ls(self) -> tuple[int, int, int]:
        return (self.l1, self.l2, self.l3)

    @property
    def alpha(self) -> int:
        return self.l1 * (self.l1 + 1)

    @property
    def beta(self) -> int:
        return self.l2 * (self.l2 + 1)

    @property
    def gamma(self) -> int:
        return self.l3 * (self.l3 + 1)

    @property
    def distinct(self) -> bool:
        return self.l1 > self.l2 > self.l3

    def to_dict(self) -> dict:
        m = self.multipliers
        return {
            "l1": self.l1, "l2": self.l2, "l3": self.l3,
            "L2": self.L2, "F": self.F,
            "probs": list(self.probs),
            "omega": self.omega,
            "feasible": self.feasible,
            "domain": self.domain.value,
            "eta": m.eta if m else None,
            "Lambda": m.Lambda if m else None,
            "energy": m.energy if m else None,
            "multiplier_residual": m.residual if m else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TripleSolution":
        multipliers = None
        if d.get("eta") is not None:
            multipliers = Multipliers(d["eta"], d["Lambda"], d["energy"], d.get("multiplier_residual", 0.0))
        return cls(
            int(d["l1"]), int(d["l2"]), int(d["l3"]), float(d["L2"]), float(d["F"]),
            tuple(float(p) for p in d["probs"]), float(d["omega"]), bool(d["feasible"]),
            Domain(d["domain"]), multipliers,
        )


def _check_triple(l1, l2, l3) -> tuple[int, int, int]:
    ls = []
    for l in (l1, l2, l3):
        if isinstance(l, bool) or int(l) != l:
            raise InvalidInputError(f"l values must be integers, got {(l1, l2, l3)}")
        ls.append(int(l))
    if not ls[0] >= ls[1] >= ls[2] >= 0:
        raise InvalidInputError(f"need l1 >= l2 >= l3 >= 0, got {tuple(ls)}")
    return ls[0], ls[1], ls[2]


def _check_moments(L2: float, F: float) -> None:
    if not (math.isfinite(L2) and L2 > 0):
        raise InvalidInputError(f"L2 must be > 0, got {L2!r}")
    if not math.isfinite(F) or F < L2 * L2 * (1 - 1e-12):
        raise InvalidInputError(f"need F >= L2^2 (R >= 0), got F={F!r}, L2={L2!r}")


def continuous_probabilities(ls: Sequence[float], L2: float, F: float) -> np.ndarray:
    """Closed-form p_i for three distinct (possibly real-valued) l_i."""
    a, b, g = (float(l) * (float(l) + 1) for l in ls)
    return np.array([
        (b * g - L2 * (b + g) + F) / ((a - b) * (a - g)),
        (a * g - L2 * (a + g) + F) / ((b - a) * (b - g)),
        (a * b - L2 * (a + b) + F) / ((g - a) * (g - b)),
    ])


def _in_unit_interval(p) -> bool:
    return all(-PROB_TOL <= x <= 1 + PROB_TOL for x in p)


def _raw_probabilities(l1: int, l2: int, l3: int, L2: float, F: float) -> tuple[np.ndarray, bool]:
    """Unclamped probabilities plus whether repeated levels reproduce F."""
    a = [l * (l + 1) for l in (l1, l2, l3)]
    if l1 > l2 > l3:
        return continuous_probabilities((l1, l2, l3), L2, F), True
    if l1 == l2 == l3:
        ok = abs(L2 - a[0]) <= DEGENERATE_F_TOL and abs(F - a[0] ** 2) <= DEGENERATE_F_TOL * max(1.0, F)
        return np.full(3, 1.0 / 3.0), ok
    # two distinct levels: u > v; the repeated level's weight is split evenly
    u, v = a[0], a[2]
    pu = (L2 - v) / (u - v)
    pv = 1.0 - pu
    ok = abs(pu * u * u + pv * v * v - F) <= DEGENERATE_F_TOL * max(1.0, F)
    if l1 == l2:
        return np.array([pu / 2, pu / 2, pv]), ok
    return np.array([pu, pv / 2, pv / 2]), ok


def _classify(l1, l2, l3, L2, F, probs, consistent) -> Domain:
    if not (consistent and _in_unit_interval(probs)):
        return Domain.INFEASIBLE
    if not l1 > l2 > l3:
        return Domain.DEGENERATE
    alpha, beta, gamma = (l * (l + 1) for l in (l1, l2, l3))
    if L2 - gamma <= PROB_TOL * max(1.0, L2):
        # all weight sits on the lowest level
        return Domain.DEGENERATE
    tol = 1e-9 * max(1.0, F)
    r3 = (F - gamma * L2) / (L2 - gamma)
    if gamma <= L2 + tol and L2 <= beta + tol and beta <= r3 + tol and r3 <= alpha + tol:
        return Domain.DOM1
    r2 = (F - beta * L2) / (L2 - beta)
    if beta <= L2 + tol and L2 <= r3 + tol and r3 <= alpha + tol and alpha <= r2 + tol:
        return Domain.DOM2
    # unreachable for feasible probabilities: the sign conditions imply one chain
    raise AssertionError(f"feasible triple {(l1, l2, l3)} fits neither domain chain")


def solve_probabilities(l1: int, l2: int, l3: int, L2: float, F: float) -> TripleSolution:
    l1, l2, l3 = _check_triple(l1, l2, l3)
    _check_moments(L2, F)
    raw, consistent = _raw_probabilities(l1, l2, l3, L2, F)
    domain = _classify(l1, l2, l3, L2, F, raw, consistent)
    feasible = domain is not Domain.INFEASIBLE
    probs = np.clip(raw, 0.0, 1.0) if feasible else raw
    omega = 1.5 + float(probs @ np.array([l1, l2, l3], dtype=float))
    return TripleSolution(
        l1, l2, l3, float(L2), float(F),
        tuple(float(p) for p in probs), omega, feasible, domain,
    )


def feasibility_domain(l1: int, l2: int, l3: int, L2: float, F: float) -> Domain:
    return solve_probabilities(l1, l2, l3, L2, F).domain


def omega_of_triple(sol: TripleSolution, n: Sequence[int] = (0, 0, 0)) -> float:
    if not sol.feasible:
        raise InfeasibleError(f"triple {sol.ls} is infeasible for L2={sol.L2}, F={sol.F}")
    if len(n) != 3 or any(int(k) != k or k < 0 for k in n):
        raise InvalidInputError(f"n must be three nonnegative integers, got {n!r}")
    levels = np.array([2 * k + l for k, l in zip(n, sol.ls)], dtype=float)
    return 1.5 + float(np.array(sol.probs) @ levels)


def variance_floor(L2: float) -> float:
    """Smallest variance of L^2 compatible with mean ``L2`` on integer l.

    Attained by splitting weight between the two eigenvalues k(k+1) and
    (k+1)(k+2) that bracket L2; zero when L2 is itself an eigenvalue.
    """
    if L2 < 0:
        raise InvalidInputError("L2 must be >= 0")
    k = int(math.floor(0.5 * math.sqrt(4.0 * L2 + 1.0) - 0.5))
    while (k + 1) * (k + 2) <= L2:
        k += 1
    while k > 0 and k * (k + 1) > L2:
        k -= 1
    lo, hi = k * (k + 1), (k + 1) * (k + 2)
    return max(0.0, (L2 - lo) * (hi - L2))


def is_feasible(L2: float, R: float) -> bool:
    return R >= variance_floor(L2) - 1e-9 * max(1.0, R)


def default_l_max(L2: float, R: float) -> int:
    return int(math.ceil(2.0 * continuous_optimum_x(L2, R))) + 2


def _prefix_ranges(sizes: np.ndarray) -> np.ndarray:
    # concatenation of arange(s) for s in sizes
    offsets = np.repeat(np.cumsum(sizes) - sizes, sizes)
    return np.arange(int(sizes.sum())) - offsets


@lru_cache(maxsize=8)
def _triples(l_max: int) -> np.ndarray:
    """All l1 >= l2 >= l3 <= l_max in lexicographic order of (l1, l2, l3)."""
    levels = np.arange(l_max + 1)
    # lexicographic pairs (l2, l3) with l2 >= l3; those with l2 <= a form a prefix
    b = np.repeat(levels, levels + 1)
    c = _prefix_ranges(levels + 1)
    pair_counts = (levels + 1) * (levels + 2) // 2
    a = np.repeat(levels, pair_counts)
    idx = _prefix_ranges(pair_counts)
    out = np.column_stack([a, b[idx], c[idx]]).astype(np.int64)
    out.setflags(write=False)
    return out


def _omega_all(triples: np.ndarray, L2: float, F: float) -> np.ndarray:
    """Vectorized omega for every triple; +inf where infeasible."""
    with np.errstate(divide="ignore", invalid="ignore"):
        l = triples.astype(float)
        l1, l2, l3 = l.T
        A, B, G = (l * (l + 1)).T
        distinct = (triples[:, 0] > triples[:, 1]) & (triples[:, 1] > triples[:, 2])
        all_eq = triples[:, 0] == triples[:, 2]
        two = ~distinct & ~all_eq
        f_tol = DEGENERATE_F_TOL * max(1.0, F)

        p1 = (B * G - L2 * (B + G) + F) / ((A - B) * (A - G))
        p2 = (A * G - L2 * (A + G) + F) / ((B - A) * (B - G))
        p3 = (A * B - L2 * (A + B) + F) / ((G - A) * (G - B))
        probs_ok = (
            (p1 >= -PROB_TOL) & (p1 <= 1 + PROB_TOL)
            & (p2 >= -PROB_TOL) & (p2 <= 1 + PROB_TOL)
            & (p3 >= -PROB_TOL) & (p3 <= 1 + PROB_TOL)
        )
        omega = np.full(len(triples), np.inf)
        sel = distinct & probs_ok
        omega[sel] = 1.5 + (np.clip(p1, 0, 1) * l1 + np.clip(p2, 0, 1) * l2 + np.clip(p3, 0, 1) * l3)[sel]

        # two distinct levels: the top one is always l1 and the bottom one l3
        pu = (L2 - G) / (A - G)
        pu_ok = (pu >= -PROB_TOL) & (pu <= 1 + PROB_TOL)
        f_ok = np.abs(pu * A * A + (1 - pu) * G * G - F) <= f_tol
        sel = two & pu_ok & f_ok
        pc = np.clip(pu, 0, 1)
        omega[sel] = (1.5 + pc * l1 + (1 - pc) * l3)[sel]

        sel = all_eq & (np.abs(A - L2) <= DEGENERATE_F_TOL) & (np.abs(A * A - F) <= f_tol)
        omega[sel] = (1.5 + l1)[sel]
    return omega


def omega_min_integer(L2: float, R: float, l_max: int | None = None) -> TripleSolution:
    """Exhaustive minimum of omega over integer triples with l_i <= l_max (n_i = 0).

    Ties within 1e-12 go to the lexicographically smallest (l1, l2, l3).
    """
    inputs = BoundInputs(L2, R)
    if inputs.L2 == 0:
        raise InvalidInputError("L2 must be > 0")
    x = continuous_optimum_x(inputs.L2, inputs.R)
    if l_max is None:
        l_max = default_l_max(inputs.L2, inputs.R)
    if l_max < math.ceil(x) + 1:
        raise InvalidInputError(
            f"l_max={l_max} cannot contain the continuous optimum x={x:.6g}; need >= {math.ceil(x) + 1}"
        )
    if not is_feasible(inputs.L2, inputs.R):
        raise InfeasibleError(
            f"no state has <L^2>={inputs.L2} with variance {inputs.R} "
            f"(minimum is {variance_floor(inputs.L2)})"
        )
    triples = _triples(int(l_max))
    omega = _omega_all(triples, inputs.L2, inputs.F)
    best = float(np.min(omega))
    if not math.isfinite(best):
        raise InfeasibleError(f"no feasible triple up to l_max={l_max}")
    winner = triples[int(np.argmax(omega <= best + TIE_TOL * max(1.0, best)))]
    sol = solve_probabilities(*(int(v) for v in winner), inputs.L2, inputs.F)
    if not sol.feasible:
        raise AssertionError(f"vectorized and scalar solvers disagree at {tuple(winner)}")
    if sol.distinct:
        sol = _with_multipliers(sol)
    return sol


def _with_multipliers(sol: TripleSolution) -> TripleSolution:
    return replace(sol, multipliers=recover_multipliers(sol))


def multiplier_system(ls: Sequence[int], omega: float, ns: Sequence[int] = (0, 0, 0)):
    """Rows of omega(3/2 + 2n + l) + eta a + Lambda a^2 - E = 0 as (M, rhs) for (eta, Lambda, E)."""
    a = np.array([l * (l + 1) for l in ls], dtype=float)
    M = np.column_stack([a, a * a, -np.ones_like(a)])
    rhs = -omega * (1.5 + 2 * np.asarray(ns, dtype=float) + np.asarray(ls, dtype=float))
    return M, rhs


def recover_multipliers(sol: TripleSolution, omega: float | None = None) -> Multipliers:
    """Solve the three stationarity equations for (eta, Lambda, energy)."""
    if not sol.feasible:
        raise InfeasibleError(f"triple {sol.ls} is infeasible")
    if not sol.distinct:
        raise UnderdeterminedError(f"triple {sol.ls} repeats an l value; multipliers are not unique")
    omega = sol.omega if omega is None else float(omega)
    M, rhs = multiplier_system(sol.ls, omega)
    eta, lam, energy = np.linalg.solve(M, rhs)
    residual = float(np.max(np.abs(M @ np.array([eta, lam, energy]) - rhs)))
    return Multipliers(float(eta), float(lam), float(energy), residual)


@dataclass(frozen=True)
class DerivativeReport:
    derivatives: tuple[float, float, float]
    signs: tuple[int, int, int]
    pattern_ok: bool


def _omega_continuous(ls: np.ndarray, L2: float, F: float) -> float:
    return 1.5 + float(continuous_probabilities(ls, L2, F) @ ls)


def omega_gradient_closed_form(ls: Sequence[float], L2: float, F: float) -> np.ndarray:
    """d omega / d l_i at fixed (L2, F), from the factored closed form."""
    l = np.asarray(ls, dtype=float)
    p = continuous_probabilities(l, L2, F)
    S = 2.0 + l.sum()
    Q = lambda j, k: 1.0 + l[j] + l[k]  # noqa: E731
    den = Q(0, 1) * Q(0, 2) * Q(1, 2)
    return np.array([
        (l[0] - l[1]) * (l[0] - l[2]) * (S + l[0]) / den * p[0],
        (l[1] - l[0]) * (l[1] - l[2]) * (S + l[1]) / den * p[1],
        (l[2] - l[0]) * (l[2] - l[1]) * (S + l[2]) / den * p[2],
    ])


def derivative_signs(
    l1: float, l2: float, l3: float, L2: float, F: float,
    step: float = 1e-5, slack: float = 1e-8,
) -> DerivativeReport:
    """Finite-difference signs of omega in each l_i; expected (+, -, +)."""
    l = np.array([l1, l2, l3], dtype=float)
    if not (l[0] > l[1] > l[2] >= 0):
        raise InvalidInputError(f"need l1 > l2 > l3 >= 0, got {tuple(l)}")
    _check_moments(L2, F)
    if not _in_unit_interval(continuous_probabilities(l, L2, F)):
        raise InfeasibleError(f"probabilities at {tuple(l)} fall outside [0, 1]")
    derivs = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = step
        if l[i] - step < 0:
            d = (_omega_continuous(l + e, L2, F) - _omega_continuous(l, L2, F)) / step
        else:
            d = (_omega_continuous(l + e, L2, F) - _omega_continuous(l - e, L2, F)) / (2 * step)
        derivs.append(d)
    signs = tuple(1 if d > slack else (-1 if d < -slack else 0) for d in derivs)
    ok = derivs[0] >= -slack and derivs[1] <= slack and derivs[2] >= -slack
    return DerivativeReport(tuple(derivs), signs, ok)


def w_audit(L2: float, R: float, l_max: int | None = None) -> dict:
    """Compare the printed W and the ceiling/floor triple with exhaustive search."""
    inputs = BoundInputs(L2, R)
    x = continuous_optimum_x(inputs.L2, inputs.R)
    search = omega_min_integer(inputs.L2, inputs.R, l_max)
    w = closed_form_W(inputs.L2, inputs.R).value
    c, f = math.ceil(x), math.floor(x)
    pair = solve_probabilities(c, f, 0, inputs.L2, inputs.F) if c >= f >= 0 else None
    pair_omega = pair.omega if pair is not None and pair.feasible else None
    return {
        "x": x,
        "omega": omega_bound(inputs.L2, inputs.R).value,
        "omega_min": search.omega,
        "search_triple": list(search.ls),
        "w_as_printed": w,
        "w_consistent": abs(w - search.omega) <= SAT_TOL,
        "ceil_floor_triple": [c, f, 0],
        "ceil_floor_omega": pair_omega,
        "ceil_floor_matches_search": pair_omega is not None and abs(pair_omega - search.omega) <= SAT_TOL,
    }
