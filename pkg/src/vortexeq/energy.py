"""Vortex Hamiltonians, their gradients and the hypothesis checkers.

Conventions
-----------
``N`` moving vortices ``xi_j`` with strengths ``gamma_j`` interact with ``ell``
fixed sources ``p_i`` of strength ``alpha_i > 0``.  Pair sums run over
*ordered* pairs ``j != k`` so each unordered pair is counted twice.

* free model ``H0 = sum_j gamma_j^2 H(xi_j, xi_j) + sum_{j!=k} gamma_j gamma_k G(xi_j, xi_k)``
* reduced model ``H = sum_{j!=k} gamma_j gamma_k G - sum_i alpha_i sum_j gamma_j G(xi_j, p_i) + sum_j h(xi_j)``
* companion ``Phi``: as ``H`` with a plus sign on the source term
* singular parts ``Psi(+/-)``: the log-distance skeleton of ``H`` and ``Phi``

All indices in this module are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .combinatorics import CouplingSpec, capacity, coupling_feasible
from .surface import FloatArray, SingularityError, Surface

TWO_PI = 2.0 * math.pi
FD_STEP = 1e-6
MAX_COMPACTNESS_N = 24


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class SourceSet:
    """Fixed singular sources ``p_i`` with strengths ``alpha_i > 0``."""

    positions: FloatArray
    strengths: FloatArray

    def __post_init__(self) -> None:
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        alpha = np.atleast_1d(np.asarray(self.strengths, dtype=float))
        if pos.size == 0:
            pos = pos.reshape(0, pos.shape[-1] if pos.ndim == 2 else 3)
        if pos.shape[0] != alpha.shape[0]:
            raise ValueError("source positions and strengths differ in length")
        if np.any(alpha <= 0):
            raise ValueError("source strengths must be positive")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "strengths", alpha)

    @classmethod
    def empty(cls, dim: int = 3) -> "SourceSet":
        return cls(np.zeros((0, dim)), np.zeros(0))

    def __len__(self) -> int:
        return int(self.strengths.shape[0])

    @property
    def total(self) -> float:
        """Total source strength (the sum of all ``alpha_i``)."""
        return float(np.sum(self.strengths))


@dataclass(frozen=True)
class VortexConfig:
    """Vortex positions on a surface together with their strengths."""

    surface: Surface
    positions: FloatArray
    strengths: FloatArray

    def __post_init__(self) -> None:
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        gamma = np.atleast_1d(np.asarray(self.strengths, dtype=float))
        if pos.shape[0] != gamma.shape[0]:
            raise ValueError("vortex positions and strengths differ in length")
        if pos.shape[0] < 1:
            raise ValueError("at least one vortex is required")
        if np.any(gamma == 0):
            raise ValueError("vortex strengths must be nonzero")
        self.surface.validate(pos)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "strengths", gamma)

    def __len__(self) -> int:
        return int(self.strengths.shape[0])

    def with_positions(self, positions: ArrayLike) -> "VortexConfig":
        return VortexConfig(self.surface, np.asarray(positions, dtype=float), self.strengths)


ScalarField = Callable[[FloatArray], FloatArray]


@dataclass(frozen=True)
class Background:
    """Smooth background potential ``h`` and optional weight ``kappa``.

    Parameters
    ----------
    h, grad_h
        Vectorized callables on point arrays of shape ``(n, dim)``.  When
        ``grad_h`` is missing the tangent gradient is taken by central
        differences along a tangent frame.
    kappa, lap_log_kappa
        Positive weight and the Laplacian of its logarithm, used only by
        :func:`quantity_A`.  Defaults represent ``kappa = 1``.
    """

    h: ScalarField | None = None
    grad_h: ScalarField | None = None
    kappa: ScalarField | None = None
    lap_log_kappa: ScalarField | None = None

    def value(self, surface: Surface, x: FloatArray) -> FloatArray:
        x = np.atleast_2d(x)
        if self.h is None:
            return np.zeros(x.shape[0])
        return np.asarray(self.h(x), dtype=float).reshape(x.shape[0])

    def gradient(self, surface: Surface, x: FloatArray) -> FloatArray:
        x = np.atleast_2d(x)
        if self.h is None:
            return np.zeros_like(x)
        if self.grad_h is not None:
            return surface.project(x, np.asarray(self.grad_h(x), dtype=float))
        frame = surface.frame(x)
        out = np.zeros_like(x)
        for a in range(2):
            e = frame[..., a] * FD_STEP
            d = (self.value(surface, surface.retract(x, e)) - self.value(surface, surface.retract(x, -e))) / (
                2.0 * FD_STEP
            )
            out += d[:, None] * frame[..., a]
        return out

    def kappa_value(self, x: FloatArray) -> FloatArray:
        x = np.atleast_2d(x)
        if self.kappa is None:
            return np.ones(x.shape[0])
        return np.asarray(self.kappa(x), dtype=float).reshape(x.shape[0])

    def lap_log_kappa_value(self, x: FloatArray) -> FloatArray:
        x = np.atleast_2d(x)
        if self.lap_log_kappa is None:
            return np.zeros(x.shape[0])
        return np.asarray(self.lap_log_kappa(x), dtype=float).reshape(x.shape[0])

    @classmethod
    def liouville(
        cls,
        surface: Surface,
        kappa: ScalarField | None = None,
        grad_log_kappa: ScalarField | None = None,
        lap_log_kappa: ScalarField | None = None,
    ) -> "Background":
        """Background of the mean-field reduction, ``h = H(x, x) + log(kappa) / 4pi``.

        ``H(x, x)`` is constant on the homogeneous surfaces provided here, so
        the gradient of ``h`` is ``grad log kappa / 4pi``.
        """
        diag = surface.regular_diagonal()

        def h(x: FloatArray) -> FloatArray:
            x = np.atleast_2d(x)
            k = np.ones(x.shape[0]) if kappa is None else np.asarray(kappa(x), dtype=float)
            return diag + np.log(k) / (4.0 * math.pi)

        grad: ScalarField | None
        if kappa is None:
            grad = lambda x: np.zeros_like(np.atleast_2d(x))  # noqa: E731
        elif grad_log_kappa is not None:
            grad = lambda x: np.asarray(grad_log_kappa(x)) / (4.0 * math.pi)  # noqa: E731
        else:
            grad = None
        return cls(h=h, grad_h=grad, kappa=kappa, lap_log_kappa=lap_log_kappa)


@dataclass(frozen=True)
class VortexProblem:
    """Everything the reduced Hamiltonian depends on apart from positions."""

    surface: Surface
    strengths: FloatArray
    sources: SourceSet = field(default=None)  # type: ignore[assignment]
    background: Background = field(default_factory=Background)

    def __post_init__(self) -> None:
        gamma = np.atleast_1d(np.asarray(self.strengths, dtype=float))
        object.__setattr__(self, "strengths", gamma)
        if self.sources is None:
            object.__setattr__(self, "sources", SourceSet.empty(self.surface.dim))

    @property
    def n_vortices(self) -> int:
        return int(self.strengths.shape[0])

    def config(self, positions: ArrayLike) -> VortexConfig:
        return VortexConfig(self.surface, np.asarray(positions, dtype=float), self.strengths)

    def energy(self, positions: ArrayLike) -> float:
        return hamiltonian_reduced(self.config(positions), self.sources, self.background)

    def phi(self, positions: ArrayLike) -> float:
        return phi(self.config(positions), self.sources, self.background)

    def gradient(self, positions: ArrayLike) -> FloatArray:
        return grad_hamiltonian(self.config(positions), self.sources, self.background)


# ---------------------------------------------------------------------------
# admissibility


def _pairs(n: int) -> tuple[NDArray[np.intp], NDArray[np.intp]]:
    return np.triu_indices(n, k=1)


def ensure_admissible(config: VortexConfig, sources: SourceSet | None = None) -> None:
    """Raise :class:`SingularityError` if ``config`` lies outside the admissible set.

    Vortices must be pairwise separated and separated from every source by
    more than the surface collision tolerance.  The message names the first
    offending pair.
    """
    s = config.surface
    x = config.positions
    tol = s.collision_tol
    if len(config) > 1:
        j, k = _pairs(len(config))
        d = s.distance(x[j], x[k])
        bad = np.flatnonzero(d < tol)
        if bad.size:
            b = bad[0]
            raise SingularityError(
                f"vortices {int(j[b])} and {int(k[b])} collide (distance {d[b]:.3e})"
            )
    if sources is not None and len(sources):
        d = s.distance(x[:, None, :], sources.positions[None, :, :])
        bad = np.argwhere(d < tol)
        if bad.size:
            jj, ii = bad[0]
            raise SingularityError(
                f"vortex {int(jj)} collides with source {int(ii)} (distance {d[jj, ii]:.3e})"
            )


def is_admissible(config: VortexConfig, sources: SourceSet | None = None) -> bool:
    try:
        ensure_admissible(config, sources)
    except SingularityError:
        return False
    return True


# ---------------------------------------------------------------------------
# building blocks


def _pair_sum(config: VortexConfig, kernel: Callable[[FloatArray, FloatArray], FloatArray]) -> float:
    """``sum_{j != k} gamma_j gamma_k kernel(xi_j, xi_k)`` for a symmetric kernel."""
    n = len(config)
    if n < 2:
        return 0.0
    j, k = _pairs(n)
    g = config.strengths
    x = config.positions
    # fsum is correctly rounded, hence independent of the vortex order
    return 2.0 * math.fsum((g[j] * g[k] * kernel(x[j], x[k])).tolist())


def _source_sum(
    config: VortexConfig,
    sources: SourceSet,
    kernel: Callable[[FloatArray, FloatArray], FloatArray],
) -> float:
    """``sum_i alpha_i sum_j gamma_j kernel(xi_j, p_i)``."""
    if len(sources) == 0:
        return 0.0
    vals = kernel(config.positions[:, None, :], sources.positions[None, :, :])
    terms = config.strengths[:, None] * vals * sources.strengths[None, :]
    return math.fsum(terms.ravel().tolist())


def _log_distance(surface: Surface) -> Callable[[FloatArray, FloatArray], FloatArray]:
    return lambda a, b: np.log(surface.distance(a, b))


def _background_sum(config: VortexConfig, bg: Background | None) -> float:
    if bg is None:
        return 0.0
    return math.fsum(bg.value(config.surface, config.positions).tolist())


# ---------------------------------------------------------------------------
# Hamiltonians


def hamiltonian_free(config: VortexConfig) -> float:
    """Kirchhoff-Routh energy of signed vortices without sources or background."""
    ensure_admissible(config)
    s = config.surface
    self_part = math.fsum((config.strengths**2).tolist()) * s.regular_diagonal()
    return self_part + _pair_sum(config, s.green)


def _require_positive(config: VortexConfig) -> None:
    if np.any(config.strengths <= 0):
        raise ValueError("the reduced model requires positive vortex strengths")


def hamiltonian_reduced(
    config: VortexConfig, sources: SourceSet | None = None, bg: Background | None = None
) -> float:
    """Reduced Hamiltonian of positive vortices interacting with fixed sources."""
    sources = sources if sources is not None else SourceSet.empty(config.surface.dim)
    _require_positive(config)
    ensure_admissible(config, sources)
    s = config.surface
    return (
        _pair_sum(config, s.green)
        - _source_sum(config, sources, s.green)
        + _background_sum(config, bg)
    )


def phi(config: VortexConfig, sources: SourceSet | None = None, bg: Background | None = None) -> float:
    """Companion energy with the source interaction sign reversed.

    It blows up to ``+inf`` at every boundary stratum of the admissible set,
    so its sublevel sets are the natural search domains.
    """
    sources = sources if sources is not None else SourceSet.empty(config.surface.dim)
    _require_positive(config)
    ensure_admissible(config, sources)
    s = config.surface
    return (
        _pair_sum(config, s.green)
        + _source_sum(config, sources, s.green)
        + _background_sum(config, bg)
    )


def psi_pm(config: VortexConfig, sources: SourceSet | None = None, sign: int = +1) -> float:
    """Log-distance skeleton of the reduced energy (``sign=+1``) or of ``Phi`` (``sign=-1``).

    ``-(1/2pi) sum_{j!=k} g_j g_k log d(xi_j, xi_k) + sign * sum_i (alpha_i/2pi) sum_j g_j log d(xi_j, p_i)``
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    sources = sources if sources is not None else SourceSet.empty(config.surface.dim)
    ensure_admissible(config, sources)
    logd = _log_distance(config.surface)
    return (-_pair_sum(config, logd) + sign * _source_sum(config, sources, logd)) / TWO_PI


def regular_part_sum(
    config: VortexConfig, sources: SourceSet | None = None, bg: Background | None = None
) -> float:
    """Smooth remainder ``H - Psi(+)``, built from regular parts of ``G`` only."""
    sources = sources if sources is not None else SourceSet.empty(config.surface.dim)
    s = config.surface
    return (
        _pair_sum(config, s.green_regular)
        - _source_sum(config, sources, s.green_regular)
        + _background_sum(config, bg)
    )


# ---------------------------------------------------------------------------
# gradient


def grad_hamiltonian(
    config: VortexConfig, sources: SourceSet | None = None, bg: Background | None = None
) -> FloatArray:
    """Riemannian gradient of the reduced Hamiltonian, one tangent vector per vortex.

    Returns an array of shape ``(N, dim)``; row ``j`` is the gradient in
    ``xi_j`` with all other positions frozen.
    """
    sources = sources if sources is not None else SourceSet.empty(config.surface.dim)
    ensure_admissible(config, sources)
    return gradient_kernel(config.surface, config.positions, config.strengths, sources, bg)


def gradient_kernel(
    s: Surface, x: FloatArray, g: FloatArray, sources: SourceSet, bg: Background | None
) -> FloatArray:
    """Gradient of the reduced Hamiltonian without input validation.

    Used in inner loops (time stepping, root finding) where positions are
    already known to be admissible; prefer :func:`grad_hamiltonian` elsewhere.
    """
    n = x.shape[0]
    out = np.zeros_like(x)
    if n > 1:
        j, k = _pairs(n)
        gjk = s.grad_green(x[j], x[k])  # gradient in the first slot
        gkj = s.grad_green(x[k], x[j])
        w = 2.0 * (g[j] * g[k])[:, None]
        np.add.at(out, j, w * gjk)
        np.add.at(out, k, w * gkj)
    if len(sources):
        gp = s.grad_green(x[:, None, :], sources.positions[None, :, :])
        out -= g[:, None] * np.einsum("jid,i->jd", gp, sources.strengths)
    if bg is not None:
        out += bg.gradient(s, x)
    return s.project(x, out)


# ---------------------------------------------------------------------------
# quantity A


def quantity_A(config: VortexConfig, sources: SourceSet | None = None, bg: Background | None = None) -> float:
    """Sign quantity deciding the side from which concentrating solutions exist.

    With unit strengths, ``N`` vortices and total source strength ``Lambda``::

        A = sum_j kappa(xi_j) exp(E_j) [lap log kappa(xi_j) + 4 pi (2N - Lambda)/|S| - 2 K(xi_j)]
        E_j = 8 pi H(xi_j, xi_j) - 4 pi sum_i alpha_i G(xi_j, p_i) + 8 pi sum_{k != j} G(xi_j, xi_k)

    The free evaluation point in the exponent is fixed to ``xi_j`` itself.
    """
    sources = sources if sources is not None else SourceSet.empty(config.surface.dim)
    bg = bg if bg is not None else Background()
    if not np.allclose(config.strengths, 1.0):
        raise ValueError("quantity_A is defined for unit vortex strengths")
    ensure_admissible(config, sources)
    s = config.surface
    x = config.positions
    n = len(config)
    expo = np.full(n, 8.0 * math.pi * s.regular_diagonal())
    if len(sources):
        gp = s.green(x[:, None, :], sources.positions[None, :, :])
        expo -= 4.0 * math.pi * gp @ sources.strengths
    if n > 1:
        j, k = _pairs(n)
        gjk = s.green(x[j], x[k])
        pair = np.zeros(n)
        np.add.at(pair, j, gjk)
        np.add.at(pair, k, gjk)
        expo += 8.0 * math.pi * pair
    bracket = (
        bg.lap_log_kappa_value(x)
        + 4.0 * math.pi * (2 * n - sources.total) / s.area
        - 2.0 * s.curvature(x)
    )
    return float(np.sum(bg.kappa_value(x) * np.exp(expo) * bracket))


# ---------------------------------------------------------------------------
# hypothesis checkers


@dataclass(frozen=True)
class CompactnessResult:
    """Outcome of the strength-ratio avoidance check for one source strength."""

    holds: bool
    witness: tuple[int, ...]
    ratio: float
    gap: float

    def __bool__(self) -> bool:
        return self.holds


def _subset_masks(n: int, start: int, stop: int) -> NDArray[np.bool_]:
    m = np.arange(start, stop, dtype=np.int64)
    return ((m[:, None] >> np.arange(n)) & 1).astype(bool)


def check_compactness(gammas: Sequence[float], alpha: float, tol: float = 1e-9) -> CompactnessResult:
    """Check that ``alpha`` avoids every subset interaction ratio.

    For each nonempty subset ``J`` the ratio is
    ``sum_{j != k in J} g_j g_k / sum_{j in J} g_j``.  The condition holds when
    ``|alpha - ratio| > tol`` for every ``J``.  The subset with the smallest
    gap is returned as the witness (0-based indices), first in bitmask order
    on ties.
    """
    g = np.asarray(gammas, dtype=float)
    n = g.size
    if n < 1:
        raise ValueError("need at least one strength")
    if n > MAX_COMPACTNESS_N:
        raise OverflowError(f"subset enumeration limited to N <= {MAX_COMPACTNESS_N}")
    best_gap, best_mask, best_ratio = math.inf, 1, 0.0
    total = 1 << n
    chunk = 1 << 18
    for start in range(1, total, chunk):
        bits = _subset_masks(n, start, min(total, start + chunk))
        s1 = bits @ g
        s2 = bits @ (g * g)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = (s1 * s1 - s2) / s1
        gap = np.where(s1 == 0.0, np.inf, np.abs(alpha - ratio))
        i = int(np.argmin(gap))
        if gap[i] < best_gap:
            best_gap, best_mask, best_ratio = float(gap[i]), start + i, float(ratio[i])
    witness = tuple(int(b) for b in range(n) if best_mask >> b & 1)
    return CompactnessResult(best_gap > tol, witness, best_ratio, best_gap)


@dataclass(frozen=True)
class ConditionResult:
    """One checked hypothesis: ``holds`` is ``None`` when it does not apply."""

    name: str
    holds: bool | None
    detail: str
    lhs: tuple[float, ...] = ()
    rhs: tuple[float, ...] = ()


@dataclass(frozen=True)
class ConditionReport:
    surface_kind: str
    conditions: dict[str, ConditionResult]
    theorem_applies: bool | None
    A: float | None = None

    def __getitem__(self, key: str) -> ConditionResult:
        return self.conditions[key]

    def as_dict(self) -> dict:
        return {
            "surface": self.surface_kind,
            "theorem_applies": self.theorem_applies,
            "A": self.A,
            "conditions": {
                k: {"holds": v.holds, "detail": v.detail, "lhs": list(v.lhs), "rhs": list(v.rhs)}
                for k, v in self.conditions.items()
            },
        }


def _ordered_pair_sum(g: NDArray[np.float64]) -> float:
    return float(np.sum(g) ** 2 - np.sum(g * g))


def group_assignment(counts: Sequence[int]) -> NDArray[np.intp]:
    """Vortex-to-source assignment placing the first ``counts[0]`` vortices in group 0, etc."""
    return np.repeat(np.arange(len(counts)), np.asarray(counts, dtype=int))


def check_theorem_conditions(
    gammas: Sequence[float],
    alphas: Sequence[float],
    surface_kind: str = "sphere",
    coupling: CouplingSpec | None = None,
    counts: Sequence[int] | None = None,
    assignment: Sequence[int] | None = None,
    tol: float = 1e-9,
) -> ConditionReport:
    """Evaluate every existence hypothesis with its numbers instantiated.

    Parameters
    ----------
    gammas, alphas
        Vortex and source strengths.
    surface_kind
        ``"sphere"``, ``"projective_plane"`` or anything else (treated as a
        surface of another topology).  Decides which hypotheses the
        existence statement needs.
    coupling
        Partition ``J_0..J_{ell-1}`` pairing each source with a partner.
    counts, assignment
        Group sizes ``N_i`` or an explicit vortex-to-source map; one of them
        is needed for the coupled conditions.

    Returns
    -------
    ConditionReport
        Keys: ``compactness``, ``unit_compactness``, ``interaction_dominance``,
        ``strength_ratio_below_max``, ``coupled_interaction_bound``,
        ``integer_coupling_capacity``, ``consecutive_capacity``.
    """
    g = np.asarray(gammas, dtype=float)
    a = np.asarray(alphas, dtype=float)
    n = g.size
    ell = a.size
    conds: dict[str, ConditionResult] = {}
    unit = bool(np.allclose(g, 1.0))

    # subset-ratio avoidance for every source
    res = [check_compactness(g, float(al), tol) for al in a]
    bad = [i for i, r in enumerate(res) if not r.holds]
    detail = "all source strengths avoid the subset ratios"
    if bad:
        i = bad[0]
        detail = f"alpha[{i}]={a[i]:g} equals ratio {res[i].ratio:g} of subset {list(res[i].witness)}"
    conds["compactness"] = ConditionResult(
        "compactness", not bad, detail, tuple(a.tolist()), tuple(r.ratio for r in res)
    )

    if unit:
        hits = [i for i in range(ell) if abs(a[i] - round(a[i])) <= tol and 1 <= round(a[i]) <= n - 1]
        conds["unit_compactness"] = ConditionResult(
            "unit_compactness",
            not hits,
            "alpha_i not in {1..N-1}" if not hits else f"alpha[{hits[0]}]={a[hits[0]]:g} in {{1..{n - 1}}}",
        )
    else:
        conds["unit_compactness"] = ConditionResult("unit_compactness", None, "strengths are not all 1")

    pair = _ordered_pair_sum(g)
    total = float(np.sum(g))
    if ell:
        imax = int(np.argmax(a))
        lhs, rhs = pair, float(a[imax] * total)
        conds["interaction_dominance"] = ConditionResult(
            "interaction_dominance", lhs < rhs, f"{lhs:g} < alpha[{imax}]*{total:g} = {rhs:g}", (lhs,), (rhs,)
        )
        ratio = pair / total
        conds["strength_ratio_below_max"] = ConditionResult(
            "strength_ratio_below_max",
            ratio < float(a[imax]),
            f"{ratio:g} < max alpha = {a[imax]:g}",
            (ratio,),
            (float(a[imax]),),
        )
    else:
        for key in ("interaction_dominance", "strength_ratio_below_max"):
            conds[key] = ConditionResult(key, None, "no sources")

    if assignment is None and counts is not None:
        if int(np.sum(counts)) != n:
            raise ValueError(f"group counts sum to {int(np.sum(counts))}, expected N = {n}")
        assignment = group_assignment(counts)
    if coupling is not None and coupling.ell != ell:
        raise ValueError("coupling size does not match the number of sources")

    if coupling is not None and assignment is not None:
        assign = np.asarray(assignment, dtype=int)
        if assign.shape != (n,) or np.any((assign < 0) | (assign >= ell)):
            raise ValueError("assignment must map each vortex to a source index")
        lhs_l, rhs_l, ok = [], [], True
        for i in range(ell):
            members = {i, *coupling.J[i]}
            mask = np.isin(assign, list(members))
            gi = g[mask]
            lhs_i = _ordered_pair_sum(gi)
            rhs_i = float(a[i] * np.sum(gi))
            lhs_l.append(lhs_i)
            rhs_l.append(rhs_i)
            # an empty extended group has nothing to control
            if gi.size and not lhs_i < rhs_i:
                ok = False
        conds["coupled_interaction_bound"] = ConditionResult(
            "coupled_interaction_bound", ok, "pair sum < alpha_i * strength sum on each extended group",
            tuple(lhs_l), tuple(rhs_l),
        )
        cnt = np.bincount(assign, minlength=ell)
        if unit:
            feas = coupling_feasible(a.tolist(), cnt, coupling)
            conds["integer_coupling_capacity"] = ConditionResult(
                "integer_coupling_capacity", feas.feasible, f"slack {feas.slack.tolist()}",
                tuple(float(v) for v in feas.load), tuple(float(v) for v in capacity(a).a),
            )
        else:
            conds["integer_coupling_capacity"] = ConditionResult(
                "integer_coupling_capacity", None, "strengths are not all 1"
            )
        if unit and coupling.is_consecutive():
            cap = capacity(a).a
            lhs_c = [int(cnt[i] + cnt[(i + 1) % ell]) for i in range(ell)]
            rhs_c = [int(cap[(i + 1) % ell]) for i in range(ell)]
            conds["consecutive_capacity"] = ConditionResult(
                "consecutive_capacity", all(x <= y for x, y in zip(lhs_c, rhs_c)),
                "N_i + N_{i+1} <= a_{i+1}", tuple(map(float, lhs_c)), tuple(map(float, rhs_c)),
            )
        else:
            conds["consecutive_capacity"] = ConditionResult(
                "consecutive_capacity", None, "coupling is not consecutive or strengths are not all 1"
            )
    else:
        for key in ("coupled_interaction_bound", "integer_coupling_capacity", "consecutive_capacity"):
            conds[key] = ConditionResult(key, None, "coupling data not supplied")

    kind = surface_kind.lower()
    if kind in ("sphere", "unit_sphere", "s2"):
        need = [conds["compactness"].holds, conds["coupled_interaction_bound"].holds, ell >= 2]
    elif kind in ("projective_plane", "rp2"):
        need = [conds["compactness"].holds, conds["strength_ratio_below_max"].holds]
    else:
        need = [conds["compactness"].holds]
    applies = None if any(v is None for v in need) else all(bool(v) for v in need)
    return ConditionReport(kind, conds, applies)

