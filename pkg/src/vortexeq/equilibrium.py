"""Multi-start search for critical points of the reduced Hamiltonian.

Critical points are located by driving the Riemannian gradient to zero with
Levenberg-Marquardt (``scipy.optimize.least_squares``) in tangent charts: a
configuration is parameterized by ``x(u) = retract(x0, F(x0) u)`` with ``F``
an orthonormal tangent frame, the residual is the gradient expressed in that
frame, and the chart is recentred after each solve.  Starts are drawn by
rejection from the admissible set intersected with the sublevel set
``{Phi < M}``.  Every converged point is classified by the inertia of a
finite-difference Hessian, so saddles are reported on equal footing with
extrema.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .energy import (
    Background,
    SourceSet,
    VortexConfig,
    VortexProblem,
    check_compactness,
    gradient_kernel,
    hamiltonian_reduced,
    is_admissible,
    phi,
)
from .surface import FloatArray, SingularityError, Surface

ZERO_EIGEN_RELATIVE = 1e-6
DEDUP_DISTANCE = 1e-4
DEFAULT_FD_STEP = 1e-4
MAX_SEED_TRIES = 10_000
MAX_RECHARTS = 12
MAX_PERMUTATION_N = 7


# ---------------------------------------------------------------------------
# domain predicate


def in_domain(
    config: VortexConfig,
    sources: SourceSet | None = None,
    bg: Background | None = None,
    M: float = np.inf,
) -> bool:
    """Whether ``config`` is admissible and satisfies ``Phi(config) < M``."""
    if not is_admissible(config, sources):
        return False
    try:
        value = phi(config, sources, bg)
    except SingularityError:
        return False
    return bool(value < M)


# ---------------------------------------------------------------------------
# charts


def _chart(surface: Surface, x0: FloatArray):
    frame = surface.frame(x0)  # (N, dim, 2)

    def point(u: FloatArray) -> FloatArray:
        step = np.einsum("ndk,nk->nd", frame, u.reshape(-1, 2))
        return surface.retract(x0, step)

    def coords(v: FloatArray) -> FloatArray:
        return np.einsum("ndk,nd->nk", frame, v).ravel()

    return point, coords


def _raw_gradient(problem: VortexProblem, x: FloatArray) -> FloatArray:
    return gradient_kernel(problem.surface, x, problem.strengths, problem.sources, problem.background)


def gradient_norm(problem: VortexProblem, positions: FloatArray) -> float:
    """Euclidean norm of the stacked Riemannian gradient."""
    return float(np.linalg.norm(problem.gradient(positions)))


def _solve_from(
    problem: VortexProblem, x0: FloatArray, tol: float
) -> tuple[FloatArray, float]:
    """Levenberg-Marquardt with chart recentring; returns position and gradient norm."""
    x = np.array(x0, dtype=float)
    gnorm = np.inf
    for _ in range(MAX_RECHARTS):
        point, coords = _chart(problem.surface, x)

        def residual(u: FloatArray) -> FloatArray:
            y = point(u)
            if not is_admissible(problem.config(y), problem.sources):
                return np.full(u.shape, 1e6)
            return coords(_raw_gradient(problem, y))

        sol = least_squares(
            residual,
            np.zeros(2 * x.shape[0]),
            method="lm",
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
            max_nfev=400 * x.shape[0],
        )
        x = point(sol.x)
        if not is_admissible(problem.config(x), problem.sources):
            return x, np.inf
        new_norm = gradient_norm(problem, x)
        if new_norm < tol and (new_norm >= 0.5 * gnorm or np.linalg.norm(sol.x) < 1e-14):
            return x, new_norm
        gnorm = new_norm
    return x, gnorm


# ---------------------------------------------------------------------------
# Hessian and inertia


def hessian(problem: VortexProblem, positions: FloatArray, fd_step: float = DEFAULT_FD_STEP) -> FloatArray:
    """Finite-difference Hessian in orthonormal tangent frames, shape ``(2N, 2N)``.

    Columns are central differences of the analytic gradient; the result is
    symmetrized.  At a critical point the frame-transport terms vanish, so
    this is the Riemannian Hessian up to ``O(fd_step^2)``.
    """
    x0 = np.asarray(positions, dtype=float)
    point, coords = _chart(problem.surface, x0)
    n = 2 * x0.shape[0]
    hess = np.zeros((n, n))
    for a in range(n):
        e = np.zeros(n)
        e[a] = fd_step
        plus = coords(_raw_gradient(problem, point(e)))
        minus = coords(_raw_gradient(problem, point(-e)))
        hess[:, a] = (plus - minus) / (2.0 * fd_step)
    return 0.5 * (hess + hess.T)


def inertia(eigenvalues: FloatArray, relative: float = ZERO_EIGEN_RELATIVE) -> tuple[int, int, int]:
    """``(n_negative, n_zero, n_positive)`` with a threshold relative to the largest ``|eigenvalue|``."""
    ev = np.asarray(eigenvalues, dtype=float)
    scale = float(np.max(np.abs(ev))) if ev.size else 0.0
    thresh = relative * scale
    neg = int(np.sum(ev < -thresh))
    pos = int(np.sum(ev > thresh))
    return neg, ev.size - neg - pos, pos


def classify(
    problem: VortexProblem, positions: FloatArray, fd_step: float = DEFAULT_FD_STEP
) -> tuple[int, int, int]:
    """Inertia triple of the Hessian at a (near) critical configuration."""
    return inertia(np.linalg.eigvalsh(hessian(problem, positions, fd_step)))


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class CriticalPointReport:
    """A converged critical point with its diagnostics."""

    config: VortexConfig
    grad_norm: float
    inertia: tuple[int, int, int]
    energy: float
    phi_value: float
    seed: int

    @property
    def positions(self) -> FloatArray:
        return self.config.positions

    def as_dict(self) -> dict:
        return {
            "positions": self.config.positions.tolist(),
            "gamma": self.config.strengths.tolist(),
            "energy": self.energy,
            "grad_norm": self.grad_norm,
            "inertia": list(self.inertia),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SearchResult:
    """Deduplicated critical points plus run statistics."""

    reports: tuple[CriticalPointReport, ...]
    starts: int
    converged: int
    seed_failures: int
    M: float
    seed: int
    start_outcomes: tuple[bool, ...] = field(default=(), repr=False)

    def __len__(self) -> int:
        return len(self.reports)

    def __iter__(self):
        return iter(self.reports)

    def __getitem__(self, k: int) -> CriticalPointReport:
        return self.reports[k]

    def to_json(self) -> str:
        return json.dumps([r.as_dict() for r in self.reports], indent=2, sort_keys=True)


def config_distance(a: VortexConfig, b: VortexConfig) -> float:
    """Largest vortex displacement, minimized over swaps of equal-strength vortices."""
    s = a.surface
    d = s.distance(a.positions[:, None, :], b.positions[None, :, :])
    n = len(a)
    gamma = a.strengths
    if n > MAX_PERMUTATION_N:
        return float(np.max(np.diag(d)))
    best = np.inf
    for perm in itertools.permutations(range(n)):
        if not np.array_equal(gamma, gamma[list(perm)]):
            continue
        best = min(best, float(np.max(d[np.arange(n), perm])))
    return best


def _sort_key(report: CriticalPointReport) -> tuple:
    pos = report.config.surface.canonical(report.config.positions)
    return (round(report.energy, 9), tuple(np.round(pos.ravel(), 9)))


def _draw_start(problem: VortexProblem, rng: np.random.Generator, M: float) -> FloatArray | None:
    for _ in range(MAX_SEED_TRIES):
        x = problem.surface.sample(rng, problem.n_vortices)
        if in_domain(problem.config(x), problem.sources, problem.background, M):
            return x
    return None


def _run_start(
    problem: VortexProblem, seq: np.random.SeedSequence, M: float, tol: float
) -> tuple[str, FloatArray | None, float]:
    rng = np.random.default_rng(seq)
    x0 = _draw_start(problem, rng, M)
    if x0 is None:
        return "no_seed", None, np.inf
    x, gnorm = _solve_from(problem, x0, tol)
    if gnorm < tol:
        return "converged", x, gnorm
    return "failed", x, gnorm


def make_report(
    problem: VortexProblem, positions: FloatArray, seed: int, fd_step: float = DEFAULT_FD_STEP
) -> CriticalPointReport:
    config = problem.config(positions)
    return CriticalPointReport(
        config=config,
        grad_norm=gradient_norm(problem, positions),
        inertia=classify(problem, positions, fd_step),
        energy=hamiltonian_reduced(config, problem.sources, problem.background),
        phi_value=phi(config, problem.sources, problem.background),
        seed=seed,
    )


def find_critical_points(
    problem: VortexProblem,
    M: float,
    starts: int = 20,
    seed: int = 0,
    tol: float = 1e-8,
    threads: int = 1,
    check_conditions: bool = True,
    fd_step: float = DEFAULT_FD_STEP,
) -> SearchResult:
    """Multi-start search for critical points of the reduced Hamiltonian inside ``{Phi < M}``.

    Parameters
    ----------
    problem
        Surface, vortex strengths, sources and background.
    M
        Sublevel bound; starts and reported points satisfy ``Phi < M``.
    starts
        Number of independent random starts; start ``k`` uses the ``k``-th
        child of ``SeedSequence(seed)``, so results do not depend on
        ``threads``.
    tol
        Convergence threshold on the gradient norm.
    check_conditions
        Require the strength-ratio avoidance condition for every source
        strength before searching.

    Returns
    -------
    SearchResult
        Reports sorted by energy then position, deduplicated to within
        surface distance ``1e-4``; ``seed`` of a report is its start index.
    """
    if starts < 1:
        raise ValueError("starts must be positive")
    if check_conditions:
        for i, alpha in enumerate(problem.sources.strengths):
            res = check_compactness(problem.strengths.tolist(), float(alpha))
            if not res.holds:
                raise ValueError(
                    f"source {i}: strength {alpha:g} matches the collapse ratio of vortices {list(res.witness)}"
                )
    children = np.random.SeedSequence(seed).spawn(starts)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda s: _run_start(problem, s, M, tol), children))
    else:
        outcomes = [_run_start(problem, s, M, tol) for s in children]

    candidates: list[CriticalPointReport] = []
    flags = []
    for k, (status, x, _) in enumerate(outcomes):
        ok = status == "converged" and x is not None
        if ok and not in_domain(problem.config(x), problem.sources, problem.background, M):
            ok = False
        flags.append(ok)
        if ok:
            candidates.append(make_report(problem, x, k, fd_step))
    candidates.sort(key=_sort_key)
    unique: list[CriticalPointReport] = []
    for rep in candidates:
        if all(config_distance(rep.config, u.config) >= DEDUP_DISTANCE for u in unique):
            unique.append(rep)
    return SearchResult(
        reports=tuple(unique),
        starts=starts,
        converged=sum(flags),
        seed_failures=sum(1 for o in outcomes if o[0] == "no_seed"),
        M=M,
        seed=seed,
        start_outcomes=tuple(flags),
    )


def polish(
    problem: VortexProblem, report: CriticalPointReport, tol: float
) -> tuple[CriticalPointReport, float]:
    """Re-solve from a reported point at tolerance ``tol``; returns the new report and the displacement."""
    x, _ = _solve_from(problem, report.positions, tol)
    new = make_report(problem, x, report.seed)
    return new, config_distance(report.config, new.config)
