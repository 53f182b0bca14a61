"""Direct minimization of <r^2><p^2> over truncated oscillator superpositions.

The product is minimized subject to three equality constraints,

    C.C = 1,   C.D2.C = L2,   C.D4.C = R + L2^2,

with an augmented Lagrangian (first-order multiplier updates, penalty growth
on stalled feasibility) whose inner problems go to L-BFGS. Only m = 0
states are used: every form is diagonal in m and independent of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .basis import QuantumNumbers, SuperpositionState, p2_matrix, r2_matrix
from .bounds import BoundInputs, continuous_optimum_x, omega_bound
from .constraints import (
    Multipliers,
    TripleSolution,
    is_feasible,
    omega_min_integer,
    solve_probabilities,
)
from .errors import ConvergenceError, InfeasibleError, InvalidInputError
from .oracle import QuadratureConfig, p2_quadrature, r2_quadrature

VALIDATION_TOL = 1e-8
MU_MAX = 1e10
START_NOISE = 1e-2
TIE_TOL = 1e-7


@dataclass(frozen=True)
class QuadraticForms:
    labels: tuple[QuantumNumbers, ...]
    A: np.ndarray  # r^2
    B: np.ndarray  # p^2
    D2: np.ndarray  # L^2
    D4: np.ndarray  # L^4

    @property
    def H(self) -> np.ndarray:
        return 0.5 * (self.A + self.B)


def build_quadratic_forms(n_max: int, l_max: int, validate: bool = True, seed: int = 0) -> QuadraticForms:
    """Forms on the basis {|n l 0>: n <= n_max, l <= l_max}, ordered by (l, n).

    With ``validate`` a random sample of entries (plus every diagonal
    entry) is recomputed by radial quadrature.
    """
    if n_max < 0 or l_max < 0:
        raise InvalidInputError("truncation must have n_max >= 0 and l_max >= 0")
    labels = tuple(QuantumNumbers(n, l, 0) for l in range(l_max + 1) for n in range(n_max + 1))
    A = r2_matrix(labels)
    B = p2_matrix(labels)
    a = np.array([q.l * (q.l + 1) for q in labels], dtype=float)
    forms = QuadraticForms(labels, A, B, np.diag(a), np.diag(a * a))
    if validate:
        _validate_forms(forms, seed)
    return forms


def _validate_forms(forms: QuadraticForms, seed: int, samples: int = 24) -> None:
    cfg = QuadratureConfig()
    size = len(forms.labels)
    rng = np.random.default_rng(seed)
    pairs = [(i, i) for i in range(size)]
    # neighbours in n share l; they carry the only nonzero off-diagonal entries
    pairs += [(i, i + 1) for i in range(size - 1) if forms.labels[i].l == forms.labels[i + 1].l]
    pairs += [tuple(rng.integers(size, size=2)) for _ in range(samples)]
    for i, j in pairs:
        a, b = forms.labels[i], forms.labels[j]
        if a.n > 20 or a.l > 30 or b.n > 20 or b.l > 30:
            continue
        if abs(r2_quadrature(a, b, cfg) - forms.A[i, j]) > VALIDATION_TOL or \
                abs(p2_quadrature(a, b, cfg) - forms.B[i, j]) > VALIDATION_TOL:
            raise AssertionError(f"matrix element <{a}|.|{b}> disagrees with quadrature")


def product_and_gradient(x: np.ndarray, A: np.ndarray, B: np.ndarray) -> tuple[float, np.ndarray]:
    """f(x) = (x.A.x)(x.B.x) and its gradient for real x."""
    Ax = A @ x
    Bx = B @ x
    r2 = x @ Ax
    p2 = x @ Bx
    return r2 * p2, 2.0 * (p2 * Ax + r2 * Bx)


@dataclass
class OptimizeProblem:
    L2_target: float
    R_target: float
    n_max: int = 2
    l_max: int | None = None
    restarts: int = 20
    seed: int = 0
    tolerance: float = 1e-8
    complex_amplitudes: bool = False
    max_inner: int = 10_000
    max_outer: int = 60

    def __post_init__(self):
        inputs = BoundInputs(self.L2_target, self.R_target)
        if inputs.L2 <= 0:
            raise InvalidInputError("L2_target must be > 0")
        x = continuous_optimum_x(inputs.L2, inputs.R)
        need = math.ceil(x) + 1
        if self.l_max is None:
            self.l_max = need
        if self.l_max < need:
            raise InvalidInputError(f"l_max={self.l_max} cannot represent the optimum x={x:.6g}; need >= {need}")
        if self.restarts < 0 or self.n_max < 0:
            raise InvalidInputError("restarts and n_max must be >= 0")
        if not is_feasible(inputs.L2, inputs.R):
            raise InfeasibleError(f"no state has <L^2>={inputs.L2} with variance {inputs.R}")

    @property
    def F_target(self) -> float:
        return self.R_target + self.L2_target**2


@dataclass
class RestartOutcome:
    start: str
    product: float
    residual: float
    converged: bool
    outer_iterations: int


@dataclass
class OptimizeResult:
    best_product: float
    best_state: SuperpositionState
    constraint_residuals: tuple[float, float, float]
    converged: bool
    omega: float
    restarts: list[RestartOutcome] = field(default_factory=list)

    @property
    def spurious_minima(self) -> int:
        """Converged restarts that settled more than 1e-4 above the best product."""
        return sum(1 for r in self.restarts if r.converged and r.product > self.best_product + 1e-4)

    @property
    def n0_weight(self) -> float:
        return float(sum(abs(c) ** 2 for q, c in self.best_state.terms if q.n == 0))

    def to_dict(self) -> dict:
        return {
            "best_product": self.best_product,
            "omega": self.omega,
            "converged": self.converged,
            "constraint_residuals": list(self.constraint_residuals),
            "n0_weight": self.n0_weight,
            "spurious_minima": self.spurious_minima,
            "restarts": [vars(r) for r in self.restarts],
            "best_state": self.best_state.to_json_obj(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizeResult":
        return cls(
            best_product=float(d["best_product"]),
            best_state=SuperpositionState.from_json_obj(d["best_state"]),
            constraint_residuals=tuple(float(v) for v in d["constraint_residuals"]),
            converged=bool(d["converged"]),
            omega=float(d["omega"]),
            restarts=[RestartOutcome(**r) for r in d.get("restarts", [])],
        )


class _AugmentedLagrangian:
    """Product objective with scaled equality constraints on real coordinates."""

    def __init__(self, forms: QuadraticForms, L2: float, F: float, complex_amplitudes: bool):
        k = 2 if complex_amplitudes else 1
        blk = lambda M: np.kron(np.eye(k), M)  # noqa: E731
        self.A = blk(forms.A)
        self.B = blk(forms.B)
        self.mats = [np.eye(len(self.A)), blk(forms.D2), blk(forms.D4)]
        self.targets = np.array([1.0, L2, F])
        self.scales = np.array([1.0, max(1.0, L2), max(1.0, F)])
        self.diag = [np.diag(M).copy() for M in self.mats]

    def constraints(self, x):
        values = np.array([x @ (d * x) for d in self.diag])
        return (values - self.targets) / self.scales

    def lagrangian(self, x, lam, mu):
        f, g = product_and_gradient(x, self.A, self.B)
        c = self.constraints(x)
        weights = lam + mu * c
        for w, d, s in zip(weights, self.diag, self.scales):
            g = g + (2.0 * w / s) * (d * x)
        return f + lam @ c + 0.5 * mu * (c @ c), g

    def projected_gradient_norm(self, x):
        """Norm of grad f after removing components along the constraint gradients."""
        _, g = product_and_gradient(x, self.A, self.B)
        J = np.column_stack([d * x for d in self.diag])
        coef, *_ = np.linalg.lstsq(J, g, rcond=None)
        return float(np.linalg.norm(g - J @ coef))


def _inner_minimize(al: _AugmentedLagrangian, x, lam, mu, tol, max_iter):
    res = minimize(
        al.lagrangian, x, args=(lam, mu), jac=True, method="L-BFGS-B",
        options={"maxiter": max_iter, "gtol": tol, "ftol": 0.0, "maxcor": 20},
    )
    return res.x


def _multiplier_estimate(al: _AugmentedLagrangian, x: np.ndarray) -> np.ndarray:
    # least-squares KKT multipliers: grad f + J lam ~ 0
    _, g = product_and_gradient(x, al.A, al.B)
    J = np.column_stack([2.0 * d * x / s for d, s in zip(al.diag, al.scales)])
    lam, *_ = np.linalg.lstsq(J, -g, rcond=None)
    return lam


def _solve_from(al: _AugmentedLagrangian, x0: np.ndarray, problem: OptimizeProblem):
    x = x0.copy()
    lam = _multiplier_estimate(al, x)
    mu = 100.0
    residual = np.inf
    outer = 0
    for outer in range(1, problem.max_outer + 1):
        x = _inner_minimize(al, x, lam, mu, tol=0.01 * problem.tolerance, max_iter=problem.max_inner)
        c = al.constraints(x)
        new_residual = float(np.max(np.abs(c)))
        lam = lam + mu * c
        if new_residual > 0.25 * residual:
            if mu >= MU_MAX:
                break
            mu = min(mu * 10.0, MU_MAX)
        residual = new_residual
        if residual < problem.tolerance and al.projected_gradient_norm(x) < math.sqrt(problem.tolerance):
            return x, residual, True, outer
    return x, residual, False, outer


def _to_state(x: np.ndarray, forms: QuadraticForms, complex_amplitudes: bool, cutoff: float = 1e-14):
    d = len(forms.labels)
    amps = x[:d] + 1j * x[d:] if complex_amplitudes else x.astype(complex)
    keep = np.abs(amps) ** 2 > cutoff
    return SuperpositionState.from_amplitudes(
        [q for q, k in zip(forms.labels, keep) if k], amps[keep], normalize=True
    )


def _angular_start(
    forms: QuadraticForms, sol: TripleSolution, rng: np.random.Generator | None
) -> np.ndarray:
    """Amplitudes carrying the triple's l-weights; spread over random n when ``rng`` is given."""
    x = np.zeros(len(forms.labels))
    weights: dict[int, float] = {}
    # repeated levels split their weight across slots; recombine
    for l, p in zip(sol.ls, sol.probs):
        weights[l] = weights.get(l, 0.0) + p
    for l, p in weights.items():
        slots = [i for i, q in enumerate(forms.labels) if q.l == l]
        if rng is None:
            v = np.zeros(len(slots))
            v[0] = 1.0  # n = 0 comes first within each l block
        else:
            v = rng.standard_normal(len(slots))
            v /= np.linalg.norm(v)
        x[slots] = math.sqrt(p) * v
    return x


def _feasible_triples(problem: OptimizeProblem) -> list[TripleSolution]:
    out = []
    for l1 in range(problem.l_max + 1):
        for l2 in range(l1 + 1):
            for l3 in range(l2 + 1):
                sol = solve_probabilities(l1, l2, l3, problem.L2_target, problem.F_target)
                if sol.feasible:
                    out.append(sol)
    return out


def _starts(problem: OptimizeProblem, forms: QuadraticForms, rng: np.random.Generator):
    """Warm start at the search optimum, then random points with the target l-weights."""
    pad = (lambda x: np.concatenate([x, np.zeros_like(x)])) if problem.complex_amplitudes else (lambda x: x)
    dim = len(forms.labels) * (2 if problem.complex_amplitudes else 1)
    search = omega_min_integer(problem.L2_target, problem.R_target, problem.l_max)
    warm = pad(_angular_start(forms, search, None))
    yield "warm", warm / np.linalg.norm(warm)
    pool = _feasible_triples(problem)
    for i in range(problem.restarts):
        x = _angular_start(forms, pool[int(rng.integers(len(pool)))], rng)
        if problem.complex_amplitudes:
            phases = np.exp(2j * np.pi * rng.random(len(x)))
            x = np.concatenate([x * phases.real, x * phases.imag])
        x = x + START_NOISE * rng.standard_normal(dim)
        yield f"random-{i}", x / np.linalg.norm(x)


def minimize_product(problem: OptimizeProblem, forms: QuadraticForms | None = None) -> OptimizeResult:
    """Multi-start minimization of X*P = sqrt(<r^2><p^2>) (moments about the origin)."""
    forms = forms or build_quadratic_forms(problem.n_max, problem.l_max)
    al = _AugmentedLagrangian(forms, problem.L2_target, problem.F_target, problem.complex_amplitudes)
    rng = np.random.default_rng(problem.seed)

    outcomes = []
    finals = []
    for name, x0 in _starts(problem, forms, rng):
        x, residual, ok, outer = _solve_from(al, x0, problem)
        product = math.sqrt(product_and_gradient(x, al.A, al.B)[0])
        outcomes.append(RestartOutcome(name, product, residual, ok, outer))
        if ok:
            finals.append((product, x))
    if not finals:
        raise ConvergenceError(f"none of {len(outcomes)} starts converged")
    # the product is nearly flat along dilations (n-mixing within one l), so
    # near-equal minima are ties; keep the earliest start (the warm one first)
    lowest = min(p for p, _ in finals)
    best = next(f for f in finals if f[0] <= lowest + TIE_TOL)

    raw = al.constraints(best[1]) * al.scales
    return OptimizeResult(
        best_product=best[0],
        best_state=_to_state(best[1], forms, problem.complex_amplitudes),
        constraint_residuals=tuple(float(abs(v)) for v in raw),
        converged=True,
        omega=omega_bound(problem.L2_target, problem.R_target).value,
        restarts=outcomes,
    )


@dataclass(frozen=True)
class StationarityReport:
    residual: float
    support: tuple[tuple[int, int], ...]
    multipliers: tuple[float, float, float]
    underdetermined: bool
    at_most_three_levels: bool


def verify_stationarity(
    result: OptimizeResult | SuperpositionState,
    multipliers: Multipliers | None = None,
    support_tol: float = 1e-8,
) -> StationarityReport:
    """Residual of (omega H + eta L^2 + Lambda L^4 - E) C for the state's coefficient vector.

    H is taken as (<p^2> r^2 + <r^2> p^2) / 2, which reduces to omega times the
    oscillator Hamiltonian when <r^2> = <p^2> = omega. Multipliers are
    recovered from the state's support when not supplied; a support of more
    than three levels is reported (least-squares multipliers), not rejected.
    """
    state = result.best_state if isinstance(result, OptimizeResult) else result
    labels = state.labels
    c = state.amplitudes
    A = r2_matrix(labels)
    B = p2_matrix(labels)
    r2 = float(np.real(np.conj(c) @ A @ c))
    p2 = float(np.real(np.conj(c) @ B @ c))
    omega = math.sqrt(r2 * p2)
    a = np.array([q.l * (q.l + 1) for q in labels], dtype=float)
    probs = np.abs(c) ** 2
    L2 = float(probs @ a)
    F = float(probs @ a**2)

    levels = sorted({(q.n, q.l) for q, p in zip(labels, probs) if p > support_tol})
    underdetermined = False
    if multipliers is not None:
        eta, lam = multipliers.eta, multipliers.Lambda
    else:
        av = np.array([l * (l + 1) for _, l in levels], dtype=float)
        M = np.column_stack([av, av * av, -np.ones_like(av)])
        rhs = -omega * np.array([1.5 + 2 * n + l for n, l in levels])
        sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        eta, lam = float(sol[0]), float(sol[1])
        underdetermined = len(levels) < 3 or np.linalg.matrix_rank(M) < 3
    energy = omega**2 + eta * L2 + lam * F
    G = 0.5 * (p2 * A + r2 * B) + np.diag(eta * a + lam * a * a) - energy * np.eye(len(labels))
    residual = float(np.linalg.norm(G @ c))
    return StationarityReport(
        residual, tuple(levels), (float(eta), float(lam), float(energy)),
        underdetermined, len({l for _, l in levels}) <= 3,
    )
