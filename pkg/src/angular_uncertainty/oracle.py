"""Numerical ground truth that does not use the analytic matrix elements.

Radial integrals are evaluated with Gauss quadrature in t = r^2,

    int_0^inf h(r) exp(-r^2) dr = 1/2 sum_i w_i h(sqrt(t_i)),

with generalized Gauss-Laguerre nodes for the weight t^(-1/2) exp(-t). Every
integrand here is an even polynomial in r times exp(-r^2), so the rule is
exact up to rounding once the node count exceeds the polynomial degree.
Angular integrals are done analytically (orthonormal spherical harmonics).
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_genlaguerre

from .basis import (
    MomentReport,
    QuantumNumbers,
    SuperpositionState,
    angular_stats,
    moments_superposition,
)
from .bounds import omega_bound
from .errors import InvalidInputError, QuadratureError

VIOLATION_TOL = 1e-8
CONVERGENCE_TOL = 1e-8


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"


@lru_cache(maxsize=None)
def _nodes(count: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = roots_genlaguerre(count, -0.5)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@dataclass(frozen=True)
class QuadratureConfig:
    nodes: int = 128
    r_cut: float = 12.0
    max_power: int = 76

    def __post_init__(self):
        if self.nodes < 64:
            raise InvalidInputError(f"nodes must be >= 64, got {self.nodes}")
        t, w = _nodes(self.nodes)
        if math.sqrt(t[-1]) < self.r_cut:
            raise InvalidInputError(
                f"{self.nodes} nodes only reach r = {math.sqrt(t[-1]):.3g} < r_cut = {self.r_cut}"
            )
        k = np.arange(self.max_power + 1)
        with np.errstate(over="ignore", invalid="ignore"):
            approx = 0.5 * (w[None, :] * t[None, :] ** k[:, None]).sum(axis=1)
            exact = np.exp([math.lgamma(j + 0.5) for j in k]) / 2
            err = np.abs(approx / exact - 1.0)
        # Gauss rules are exact to degree 2N - 1 in t; past that, or on overflow, reject
        if self.max_power > 2 * self.nodes - 1 or not np.all(np.isfinite(err)) or err.max() > 1e-12:
            raise InvalidInputError(
                f"{self.nodes}-node rule is not exact for r^(2k) exp(-r^2), k <= {self.max_power}"
            )

    def integrate(self, h) -> float:
        """int_0^inf h(r) exp(-r^2) dr for an even polynomial ``h``."""
        t, w = _nodes(self.nodes)
        return 0.5 * float(np.dot(w, h(np.sqrt(t))))

    def doubled(self) -> "QuadratureConfig":
        return QuadratureConfig(2 * self.nodes, self.r_cut, self.max_power)


def genlaguerre(n: int, alpha: float, x):
    """L_n^alpha(x) by the three-term recurrence (no factorials)."""
    x = np.asarray(x, dtype=float)
    if n < 0:
        return np.zeros_like(x)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def radial_norm(n: int, l: int) -> float:
    """N with N^2 = 2 n! / Gamma(n + l + 3/2)."""
    return math.exp(0.5 * (math.log(2.0) + math.lgamma(n + 1) - math.lgamma(n + l + 1.5)))


def _reduced_radial(q: QuantumNumbers, r):
    # R_nl(r) * exp(r^2 / 2)
    r = np.asarray(r, dtype=float)
    return radial_norm(q.n, q.l) * r**q.l * genlaguerre(q.n, q.l + 0.5, r * r)


def _reduced_laplacian(q: QuantumNumbers, r):
    # [radial Laplacian of R_nl](r) * exp(r^2 / 2), with P = L_n^(l+1/2)(x), x = r^2:
    #   N r^l [4x P'' + (4l + 6 - 4x) P' + (x - 2l - 3) P]
    r = np.asarray(r, dtype=float)
    x = r * r
    alpha = q.l + 0.5
    p0 = genlaguerre(q.n, alpha, x)
    p1 = -genlaguerre(q.n - 1, alpha + 1, x)
    p2 = genlaguerre(q.n - 2, alpha + 2, x)
    poly = 4 * x * p2 + (4 * q.l + 6 - 4 * x) * p1 + (x - 2 * q.l - 3) * p0
    return radial_norm(q.n, q.l) * r**q.l * poly


def radial_wavefunction(q: QuantumNumbers, r):
    """Normalized R_nl(r), int R^2 r^2 dr = 1."""
    r = np.asarray(r, dtype=float)
    return _reduced_radial(q, r) * np.exp(-0.5 * r * r)


def radial_overlap(a: QuantumNumbers, b: QuantumNumbers, cfg: QuadratureConfig | None = None) -> float:
    """int R_a R_b r^2 dr (radial part only; ignores m)."""
    cfg = cfg or QuadratureConfig()
    return cfg.integrate(lambda r: _reduced_radial(a, r) * _reduced_radial(b, r) * r**2)


def r2_quadrature(a: QuantumNumbers, b: QuantumNumbers, cfg: QuadratureConfig | None = None) -> float:
    cfg = cfg or QuadratureConfig()
    if a.l != b.l or a.m != b.m:
        return 0.0
    return cfg.integrate(lambda r: _reduced_radial(a, r) * _reduced_radial(b, r) * r**4)


def p2_quadrature(a: QuantumNumbers, b: QuantumNumbers, cfg: QuadratureConfig | None = None) -> float:
    """<a| -Laplacian |b>, with the operator applied to ``b`` only."""
    cfg = cfg or QuadratureConfig()
    if a.l != b.l or a.m != b.m:
        return 0.0
    return -cfg.integrate(lambda r: _reduced_radial(a, r) * _reduced_laplacian(b, r) * r**2)


def _check_term_limits(s: SuperpositionState) -> None:
    for q in s.labels:
        if q.n > 20 or q.l > 30:
            raise InvalidInputError(f"quadrature supports n <= 20, l <= 30; got {q}")


def _moments_at(s: SuperpositionState, cfg: QuadratureConfig) -> tuple[float, float]:
    labels = s.labels
    c = s.amplitudes
    size = len(labels)
    r2 = np.zeros((size, size))
    p2 = np.zeros((size, size))
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            r2[i, j] = r2_quadrature(a, b, cfg)
            p2[i, j] = p2_quadrature(a, b, cfg)
    return (float(np.real(np.conj(c) @ r2 @ c)), float(np.real(np.conj(c) @ p2 @ c)))


def quadrature_moments(
    s: SuperpositionState, cfg: QuadratureConfig | None = None, check_convergence: bool = True
) -> MomentReport:
    """Second moments by radial quadrature; raises if doubling nodes moves them."""
    cfg = cfg or QuadratureConfig()
    if not s.means_vanish:
        raise InvalidInputError("state mixes l and l+1 components; means do not vanish")
    _check_term_limits(s)
    r2, p2 = _moments_at(s, cfg)
    if check_convergence:
        r2_fine, p2_fine = _moments_at(s, cfg.doubled())
        drift = max(abs(r2_fine - r2), abs(p2_fine - p2))
        if drift > CONVERGENCE_TOL:
            raise QuadratureError(f"moments moved by {drift:.3g} when nodes were doubled")
    return MomentReport.from_second_moments(r2, p2)


def random_state(
    n_max: int, l_max: int, parity: Parity | str, terms: int, seed: int
) -> SuperpositionState:
    """Random parity-pure state; Gaussian complex amplitudes, deterministic per seed."""
    parity = Parity(parity)
    if terms < 1:
        raise InvalidInputError("terms must be >= 1")
    want = 0 if parity is Parity.EVEN else 1
    pool = [
        QuantumNumbers(n, l, m)
        for n in range(n_max + 1)
        for l in range(want, l_max + 1, 2)
        for m in range(-l, l + 1)
    ]
    if terms > len(pool):
        raise InvalidInputError(f"{terms} terms requested but only {len(pool)} basis states available")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(pool), size=terms, replace=False)
    amps = rng.standard_normal(terms) + 1j * rng.standard_normal(terms)
    return SuperpositionState.from_amplitudes([pool[i] for i in sorted(picks)], amps, normalize=True)


@dataclass
class ScanReport:
    samples: int
    violations: int
    worst_margin: float
    seed: int
    worst_state: list | None = field(default=None)

    def to_dict(self) -> dict:
        return asdict(self)


def scan(samples: int, n_max: int, l_max: int, terms: int, seed: int) -> ScanReport:
    """Compare the product of many random states against Omega(<L^2>, var L^2).

    Sample ``i`` uses seed ``seed + i`` for its parity, its term count
    (uniform in 1..terms) and the state itself.
    """
    if samples < 0 or terms < 1:
        raise InvalidInputError("need samples >= 0 and terms >= 1")
    violations = 0
    worst = math.inf
    worst_state = None
    for i in range(samples):
        rng = np.random.default_rng(seed + i)
        parity = Parity.EVEN if rng.integers(2) == 0 else Parity.ODD
        count = int(rng.integers(1, terms + 1))
        state = random_state(n_max, l_max, parity, count, int(rng.integers(2**63 - 1)))
        product = moments_superposition(state).product
        stats = angular_stats(state)
        margin = product - omega_bound(stats.L2_mean, stats.R).value
        if margin < -VIOLATION_TOL:
            violations += 1
        if margin < worst:
            worst = margin
            worst_state = state.to_json_obj()
    return ScanReport(samples, violations, worst, seed, worst_state)
