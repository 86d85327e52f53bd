"""Planar fiber geometry, the planar singular energy and its collapse estimates.

Sources are sent to real anchors on the extended complex plane: with
0-based indices, anchor ``i`` sits at ``q(i) = i + 1`` for ``i < ell - 1``
and the last anchor sits at infinity.  Distances use the spherical metric
``4 |dz|^2 / (1 + |z|^2)^2`` (``metric="stereo"``) or the Euclidean one
(``metric="euclidean"``, the disc model).

For ``i != r`` the map ``upsilon(i, r, .)`` sends the plane minus the two
anchors to the unit circle; its fiber over ``e^{i theta}`` is

* for ``i < r`` with finite ``q(r)``: the two legs of the isosceles
  triangle on the base ``[q(i), q(r)]`` with base angle ``theta``;
* for ``i < r`` with ``q(r) = inf``: the ray from ``q(i)`` at angle ``theta``;
* for ``r < i``: the fiber of ``upsilon(r, i, .)`` over ``e^{-i theta}``.

All indices are 0-based.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, TextIO

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .combinatorics import CouplingSpec, block_order_violations
from .surface import stereo_distance

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi
ANCHOR_TOL = 1e-9
RAY_LENGTH = 1e6
ComplexArray = NDArray[np.complex128]


class FiberError(ValueError):
    """Invalid fiber data or evaluation at an anchor."""


# ---------------------------------------------------------------------------
# anchors and the circle-valued maps


def anchor(i: int, ell: int) -> complex:
    """Position of anchor ``i``: ``i + 1`` for ``i < ell - 1`` and infinity for the last one."""
    if not 0 <= i < ell:
        raise FiberError(f"anchor index {i} out of range for ell={ell}")
    return complex(math.inf, 0.0) if i == ell - 1 else complex(i + 1, 0.0)


def anchors(ell: int) -> ComplexArray:
    return np.array([anchor(i, ell) for i in range(ell)], dtype=complex)


def _is_inf(z: ArrayLike) -> NDArray[np.bool_]:
    return ~np.isfinite(np.asarray(z, dtype=complex))


def _check_pair(i: int, r: int, ell: int) -> None:
    if i == r:
        raise FiberError("fiber endpoints must differ")
    if not (0 <= i < ell and 0 <= r < ell):
        raise FiberError(f"indices ({i}, {r}) out of range for ell={ell}")


def upsilon(i: int, r: int, z: ArrayLike, ell: int) -> ComplexArray:
    """Circle-valued map whose level sets are the fibers joining anchors ``i`` and ``r``.

    For ``i < r`` with finite ``q(r)`` it equals ``e^{i arg(z - q(i))}`` left of
    the midline ``Re z = (q(i) + q(r)) / 2`` and ``e^{i (pi - arg(z - q(r)))}``
    right of it; for infinite ``q(r)`` only the first branch is used; for
    ``r < i`` it is the reciprocal of ``upsilon(r, i, z)``.
    """
    _check_pair(i, r, ell)
    z = np.asarray(z, dtype=complex)
    if r < i:
        return 1.0 / upsilon(r, i, z, ell)
    qi, qr = anchor(i, ell), anchor(r, ell)
    if np.any(np.abs(z - qi) < ANCHOR_TOL) or (
        math.isfinite(qr.real) and np.any(np.abs(z - qr) < ANCHOR_TOL)
    ):
        raise FiberError("upsilon is undefined at its anchors")
    left = np.exp(1j * np.angle(z - qi))
    if not math.isfinite(qr.real):
        return left
    right = np.exp(1j * (math.pi - np.angle(z - qr)))
    mid = 0.5 * (qi.real + qr.real)
    return np.where(z.real <= mid, left, right)


def upsilon_branches(i: int, r: int, z: ArrayLike, ell: int) -> tuple[ComplexArray, ComplexArray]:
    """Both branch formulas of ``upsilon`` for ``i < r`` finite (used for continuity checks)."""
    _check_pair(i, r, ell)
    if not i < r < ell - 1:
        raise FiberError("two branches exist only for i < r < ell - 1")
    z = np.asarray(z, dtype=complex)
    qi, qr = anchor(i, ell), anchor(r, ell)
    return np.exp(1j * np.angle(z - qi)), np.exp(1j * (math.pi - np.angle(z - qr)))


# ---------------------------------------------------------------------------
# fibers


@dataclass(frozen=True)
class FiberSpec:
    """Fiber of ``upsilon(i, r, .)`` over ``e^{i theta}``, ``theta`` in ``(-pi/2, pi/2)``."""

    i: int
    r: int
    theta: float
    ell: int

    def __post_init__(self) -> None:
        _check_pair(self.i, self.r, self.ell)
        if not -HALF_PI < self.theta < HALF_PI:
            raise FiberError("fiber angle must lie strictly inside (-pi/2, pi/2)")

    @property
    def base(self) -> tuple[int, int, float]:
        """``(lo, hi, angle)`` of the equivalent fiber with ``lo < hi``."""
        if self.i < self.r:
            return self.i, self.r, self.theta
        return self.r, self.i, -self.theta

    @property
    def is_ray(self) -> bool:
        return max(self.i, self.r) == self.ell - 1

    @property
    def endpoints(self) -> tuple[int, int]:
        lo, hi, _ = self.base
        return lo, hi

    @property
    def max_rho(self) -> float:
        """Leg length of the triangle (``inf`` for a ray)."""
        lo, hi, th = self.base
        if self.is_ray:
            return math.inf
        return (anchor(hi, self.ell).real - anchor(lo, self.ell).real) / (2.0 * math.cos(th))

    def apex(self) -> complex:
        lo, _, th = self.base
        if self.is_ray:
            return complex(math.inf, 0.0)
        return anchor(lo, self.ell) + self.max_rho * np.exp(1j * th)


def fiber_point(spec: FiberSpec, rho: ArrayLike, side: str = "left") -> ComplexArray:
    """Point on a fiber at leg parameter ``rho``.

    ``side="left"`` walks from the lower-indexed anchor ``q(lo)`` as
    ``q(lo) + rho e^{i phi}``; ``side="right"`` walks back from ``q(hi)`` as
    ``q(hi) - rho e^{-i phi}``, where ``phi`` is the angle of the
    equivalent fiber with ``lo < hi``.  Rays only have a left side.
    """
    rho = np.asarray(rho, dtype=float)
    lo, hi, th = spec.base
    if np.any(rho <= 0):
        raise FiberError("rho must be positive")
    if spec.is_ray:
        if side != "left":
            raise FiberError("a ray fiber has only a left side")
        return anchor(lo, spec.ell) + rho * np.exp(1j * th)
    if np.any(rho > spec.max_rho * (1.0 + 1e-12)):
        raise FiberError(f"rho exceeds the leg length {spec.max_rho:g}")
    if side == "left":
        return anchor(lo, spec.ell) + rho * np.exp(1j * th)
    if side == "right":
        return anchor(hi, spec.ell) - rho * np.exp(-1j * th)
    raise FiberError("side must be 'left' or 'right'")


def point_near_anchor(spec: FiberSpec, end: int, rho: ArrayLike) -> ComplexArray:
    """Point on the fiber at distance scale ``rho`` from anchor ``end``.

    For a finite anchor the Euclidean distance to it is ``rho``; for the
    anchor at infinity the point is ``q(lo) + e^{i phi} / rho`` so that its
    spherical distance to infinity is about ``2 rho``.
    """
    lo, hi, _ = spec.base
    if end not in (lo, hi):
        raise FiberError(f"anchor {end} is not an endpoint of the fiber")
    rho = np.asarray(rho, dtype=float)
    if spec.is_ray:
        if end == lo:
            return fiber_point(spec, rho, "left")
        return fiber_point(spec, 1.0 / rho, "left")
    return fiber_point(spec, rho, "left" if end == lo else "right")


# ---------------------------------------------------------------------------
# planar energy


def planar_distance(z: ArrayLike, w: ArrayLike, metric: str = "stereo") -> NDArray[np.float64]:
    if metric == "stereo":
        return stereo_distance(z, w)
    if metric == "euclidean":
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        if np.any(_is_inf(z)) or np.any(_is_inf(w)):
            raise FiberError("the Euclidean metric has no point at infinity")
        return np.abs(z - w)
    raise FiberError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class PlanarConfig:
    """Vortices and anchors in the extended plane.

    Attributes
    ----------
    z
        Vortex positions, complex (``inf`` allowed in the stereo metric).
    strengths
        Vortex strengths ``gamma_j``.
    alphas
        Anchor strengths ``alpha_i``.
    anchor_positions
        Anchor locations; defaults to :func:`anchors` for ``len(alphas)``.
    groups
        Optional group index per vortex (which anchor's fiber it lives on).
    metric
        ``"stereo"`` or ``"euclidean"``.
    """

    z: ComplexArray
    strengths: NDArray[np.float64]
    alphas: NDArray[np.float64]
    anchor_positions: ComplexArray | None = None
    groups: tuple[int, ...] | None = None
    metric: str = "stereo"

    def __post_init__(self) -> None:
        z = np.atleast_1d(np.asarray(self.z, dtype=complex))
        g = np.atleast_1d(np.asarray(self.strengths, dtype=float))
        a = np.atleast_1d(np.asarray(self.alphas, dtype=float))
        if z.shape != g.shape:
            raise FiberError("positions and strengths differ in length")
        q = anchors(a.size) if self.anchor_positions is None else np.asarray(self.anchor_positions, dtype=complex)
        if q.shape != a.shape:
            raise FiberError("anchors and anchor strengths differ in length")
        if self.groups is not None:
            if len(self.groups) != z.size or any(not 0 <= k < a.size for k in self.groups):
                raise FiberError("group assignment must give an anchor index per vortex")
        if a.size and np.any(planar_distance(z[:, None], q[None, :], self.metric) < ANCHOR_TOL):
            raise FiberError("a vortex sits on an anchor")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "strengths", g)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "anchor_positions", q)

    def __len__(self) -> int:
        return int(self.z.size)


def psi_planar(config: PlanarConfig) -> float:
    """Planar singular energy.

    ``-(1/2pi) sum_{j!=k} g_j g_k log d(z_j, z_k) + sum_i (alpha_i/2pi) sum_j g_j log d(z_j, q_i)``
    """
    z, g = config.z, config.strengths
    total = 0.0
    n = z.size
    if n > 1:
        j, k = np.triu_indices(n, k=1)
        d = planar_distance(z[j], z[k], config.metric)
        if np.any(d <= 0):
            raise FiberError("two vortices coincide")
        total -= 2.0 * float(np.sum(g[j] * g[k] * np.log(d))) / TWO_PI
    if config.alphas.size:
        d = planar_distance(z[:, None], config.anchor_positions[None, :], config.metric)
        total += float(g @ np.log(d) @ config.alphas) / TWO_PI
    return total


def pair_identity_sides(z: ArrayLike, strengths: ArrayLike, ref: complex) -> tuple[float, float]:
    """Both sides of the ordered-pair identity for planar points.

    Returns ``(lhs, rhs)`` with
    ``lhs = 2 sum_{j!=k} g_j g_k <z_j - z_k, z_j - ref> / |z_j - z_k|^2`` and
    ``rhs = sum_{j!=k} g_j g_k``; they agree for every reference point.
    """
    z = np.asarray(z, dtype=complex)
    g = np.asarray(strengths, dtype=float)
    diff = z[:, None] - z[None, :]
    off = ~np.eye(z.size, dtype=bool)
    inner = np.real(diff * np.conj(z[:, None] - ref))
    ratio = np.zeros_like(inner)
    ratio[off] = inner[off] / np.abs(diff[off]) ** 2
    weights = np.outer(g, g) * off
    return float(2.0 * np.sum(weights * ratio)), float(np.sum(weights))


# ---------------------------------------------------------------------------
# collapse estimates


def predicted_collapse_coefficient(strengths: Sequence[float], alpha: float) -> float:
    """``(1/2pi) [sum_{j!=k} g_j g_k - alpha sum_j g_j]`` over the collapsing vortices.

    It is the asymptotic slope of the planar energy against ``-log rho`` when
    these vortices approach one anchor of strength ``alpha`` at rate ``rho``
    along fibers with distinct angles.
    """
    g = np.asarray(strengths, dtype=float)
    pairs = float(np.sum(g) ** 2 - np.sum(g * g))
    return (pairs - alpha * float(np.sum(g))) / TWO_PI


@dataclass(frozen=True)
class CollapseLayout:
    """Vortices on fibers, some of which collapse onto a common anchor.

    Attributes
    ----------
    fibers
        One :class:`FiberSpec` per vortex.
    strengths, alphas
        Vortex and anchor strengths.
    target
        Anchor index approached by the collapsing vortices.
    collapsing
        Indices of vortices whose fiber ends at ``target``; they sit at
        scale ``rho`` from it.
    rest_rho
        Leg parameter of the remaining vortices (measured from the lower
        anchor of their fiber).
    """

    fibers: tuple[FiberSpec, ...]
    strengths: tuple[float, ...]
    alphas: tuple[float, ...]
    target: int
    collapsing: tuple[int, ...]
    rest_rho: float = 0.25
    metric: str = "stereo"

    def __post_init__(self) -> None:
        if len(self.fibers) != len(self.strengths):
            raise FiberError("one fiber per vortex is required")
        bases = [f.base for f in self.fibers]
        if len(set(bases)) < len(bases):
            raise FiberError("vortices sharing a fiber pair need distinct angles")
        for j in self.collapsing:
            if self.target not in self.fibers[j].endpoints:
                raise FiberError(f"vortex {j} does not have anchor {self.target} as a fiber endpoint")

    def config(self, rho: float) -> PlanarConfig:
        z = []
        for j, spec in enumerate(self.fibers):
            if j in self.collapsing:
                z.append(complex(point_near_anchor(spec, self.target, rho)))
            else:
                r0 = self.rest_rho if spec.is_ray else min(self.rest_rho, 0.5 * spec.max_rho)
                z.append(complex(fiber_point(spec, r0, "left")))
        return PlanarConfig(np.array(z), np.array(self.strengths), np.array(self.alphas), metric=self.metric)

    def predicted(self) -> float:
        return predicted_collapse_coefficient(
            [self.strengths[j] for j in self.collapsing], self.alphas[self.target]
        )


def default_vortex_angles(n: int) -> tuple[float, ...]:
    """``n`` distinct angles in ``(0, pi/2)``, decreasing with the vortex index."""
    return tuple(HALF_PI * (n - j) / (n + 1) for j in range(n))


def layout_from_coupling(
    coupling: CouplingSpec,
    counts: Sequence[int],
    strengths: Sequence[float],
    alphas: Sequence[float],
    target: int,
    angles: Sequence[float] | None = None,
    rest_rho: float = 0.25,
    metric: str = "stereo",
) -> CollapseLayout:
    """Collapse of every vortex attached to anchor ``target`` onto it.

    Vortices are grouped in index order by ``counts``; a vortex of group
    ``i`` lives on the fiber joining anchors ``i`` and ``r(i)``.  The
    collapsing set is the group of ``target`` together with the groups it
    is coupled to.
    """
    counts = [int(c) for c in counts]
    n = sum(counts)
    if len(counts) != coupling.ell or len(alphas) != coupling.ell:
        raise FiberError("counts and alphas need one entry per anchor")
    if len(strengths) != n:
        raise FiberError("one strength per vortex is required")
    angles = default_vortex_angles(n) if angles is None else tuple(float(a) for a in angles)
    if len(angles) != n:
        raise FiberError("one angle per vortex is required")
    groups = [i for i, c in enumerate(counts) for _ in range(c)]
    fibers = tuple(FiberSpec(i, coupling.r[i], angles[j], coupling.ell) for j, i in enumerate(groups))
    attached = {target, *coupling.J[target]}
    collapsing = tuple(j for j, i in enumerate(groups) if i in attached)
    if not collapsing:
        raise FiberError(f"no vortex is attached to anchor {target}")
    return CollapseLayout(
        fibers, tuple(float(g) for g in strengths), tuple(float(a) for a in alphas),
        target, collapsing, rest_rho, metric,
    )


def collapse_trace(
    family: Callable[[float], PlanarConfig], rhos: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """``(rho, psi)`` samples of the planar energy along a collapsing family."""
    rhos = np.asarray(rhos, dtype=float)
    psi = np.array([psi_planar(family(float(r))) for r in rhos])
    return rhos, psi


def collapse_slope(
    layout: CollapseLayout | Callable[[float], PlanarConfig],
    rhos: ArrayLike | None = None,
    predicted: float | None = None,
) -> tuple[float, float]:
    """Least-squares slope of the planar energy against ``-log rho``.

    Parameters
    ----------
    layout
        A :class:`CollapseLayout` or any map ``rho -> PlanarConfig``.
    rhos
        Sample scales; defaults to 16 log-spaced values in ``[1e-6, 1e-3]``.
    predicted
        Predicted coefficient; taken from the layout when omitted.

    Returns
    -------
    (measured, predicted)
    """
    if rhos is None:
        rhos = np.logspace(-6, -3, 16)
    rhos = np.asarray(rhos, dtype=float)
    if rhos.size < 4:
        raise FiberError("at least 4 sample scales are needed")
    family = layout.config if isinstance(layout, CollapseLayout) else layout
    if predicted is None:
        if not isinstance(layout, CollapseLayout):
            raise FiberError("predicted coefficient required for a bare family")
        predicted = layout.predicted()
    _, psi = collapse_trace(family, rhos)
    slope = float(np.polyfit(-np.log(rhos), psi, 1)[0])
    return slope, float(predicted)


def write_collapse_csv(stream: TextIO, rhos: ArrayLike, psi: ArrayLike) -> None:
    """CSV with header ``rho,psi``."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["rho", "psi"])
    for r, p in zip(np.asarray(rhos, dtype=float), np.asarray(psi, dtype=float)):
        w.writerow([repr(float(r)), repr(float(p))])


# ---------------------------------------------------------------------------
# separation constants


@dataclass(frozen=True)
class SeparationResult:
    """Empirical lower bound of a normalized fiber-to-fiber distance.

    ``kind`` is ``"two_endpoints"``, ``"one_endpoint"`` or ``"disjoint"``;
    ``shared`` lists the shared anchors; ``delta`` is the smallest ratio
    observed and ``argmin`` the pair of points realizing it.
    """

    delta: float
    kind: str
    shared: tuple[int, ...]
    samples: int
    argmin: tuple[complex, complex]


def _sample_fiber(spec: FiberSpec, rng: np.random.Generator, n: int, rho_min: float) -> ComplexArray:
    if spec.is_ray:
        rho = np.exp(rng.uniform(math.log(rho_min), -math.log(rho_min), n))
        return fiber_point(spec, rho, "left")
    # log-uniform distance to whichever anchor the point is attached to
    rho = np.minimum(np.exp(rng.uniform(math.log(rho_min), math.log(spec.max_rho), n)), spec.max_rho)
    left = rng.random(n) < 0.5
    return np.where(left, fiber_point(spec, rho, "left"), fiber_point(spec, rho, "right"))


def _sample_matched(
    spec_j: FiberSpec, spec_k: FiberSpec, rng: np.random.Generator, n: int, rho_min: float
) -> tuple[ComplexArray, ComplexArray]:
    if spec_j.is_ray:
        rho = np.exp(rng.uniform(math.log(rho_min), -math.log(rho_min), n))
        return fiber_point(spec_j, rho, "left"), fiber_point(spec_k, rho, "left")
    top = min(spec_j.max_rho, spec_k.max_rho)
    rho = np.minimum(np.exp(rng.uniform(math.log(rho_min), math.log(top), n)), top)
    side = np.where(rng.random(n) < 0.5, "left", "right")
    zj = np.where(side == "left", fiber_point(spec_j, rho, "left"), fiber_point(spec_j, rho, "right"))
    zk = np.where(side == "left", fiber_point(spec_k, rho, "left"), fiber_point(spec_k, rho, "right"))
    return zj, zk


def separation_delta(
    spec_j: FiberSpec,
    spec_k: FiberSpec,
    samples: int = 10_000,
    rho_min: float = 1e-8,
    seed: int = 0,
    strict: bool = True,
    allow_identical: bool = False,
    matched: bool = False,
) -> SeparationResult:
    """Smallest observed separation ratio between points on two fibers.

    With two shared anchors ``a, b`` the ratio is
    ``d(z_j, z_k) / (d(z_j, q_a) d(z_j, q_b))``.  With one shared anchor
    ``q`` it is ``d(z_j, z_k) / max(d(z_j, q), d(z_k, q))`` when ``strict``
    and ``d(z_j, z_k) / (d(z_j, q) d(z_k, q))`` otherwise.  Without shared
    anchors it is the plain distance.  ``matched`` places both points at the
    same leg parameter, which is how identical fibers degenerate.
    """
    if spec_j.ell != spec_k.ell:
        raise FiberError("fibers belong to different anchor sets")
    same_support = spec_j.endpoints == spec_k.endpoints
    if same_support and math.isclose(spec_j.base[2], spec_k.base[2]) and not allow_identical:
        raise FiberError("fibers with identical angles coincide")
    rng = np.random.default_rng(seed)
    if matched:
        if not same_support:
            raise FiberError("matched sampling needs fibers on the same anchor pair")
        zj, zk = _sample_matched(spec_j, spec_k, rng, samples, rho_min)
    else:
        zj = _sample_fiber(spec_j, rng, samples, rho_min)
        zk = _sample_fiber(spec_k, rng, samples, rho_min)
    shared = tuple(sorted(set(spec_j.endpoints) & set(spec_k.endpoints)))
    q = anchors(spec_j.ell)
    d = stereo_distance(zj, zk)
    if len(shared) == 2:
        kind = "two_endpoints"
        ratio = d / (stereo_distance(zj, q[shared[0]]) * stereo_distance(zj, q[shared[1]]))
    elif len(shared) == 1:
        kind = "one_endpoint"
        dj = stereo_distance(zj, q[shared[0]])
        dk = stereo_distance(zk, q[shared[0]])
        ratio = d / (np.maximum(dj, dk) if strict else dj * dk)
    else:
        kind = "disjoint"
        ratio = d
    k = int(np.argmin(ratio))
    return SeparationResult(float(ratio[k]), kind, shared, samples, (complex(zj[k]), complex(zk[k])))


# ---------------------------------------------------------------------------
# intersections of fiber closures


def default_group_angles(ell: int) -> tuple[tuple[float, float], ...]:
    """Two distinct angles per group in ``(0, pi/2)``, decreasing with the group index.

    The first angle of every group exceeds the second, and the second exceeds
    the first angle of the next group.
    """
    step = HALF_PI / (2 * ell + 1)
    return tuple(((2 * ell - 2 * g) * step, (2 * ell - 2 * g - 1) * step) for g in range(ell))


def group_fiber(coupling: CouplingSpec, group: int, theta: float) -> FiberSpec:
    """Fiber of a vortex in ``group``: joins anchor ``group`` to its partner ``r(group)``."""
    return FiberSpec(group, coupling.r[group], theta, coupling.ell)


def _segments(spec: FiberSpec) -> list[tuple[complex, complex]]:
    lo, hi, th = spec.base
    q_lo = anchor(lo, spec.ell)
    if spec.is_ray:
        return [(q_lo, q_lo + RAY_LENGTH * complex(np.exp(1j * th)))]
    apex = spec.apex()
    return [(q_lo, apex), (anchor(hi, spec.ell), apex)]


def _cross2(a: complex, b: complex) -> float:
    return a.real * b.imag - a.imag * b.real


def _segment_intersections(p0: complex, p1: complex, r0: complex, r1: complex) -> list[complex]:
    d1, d2 = p1 - p0, r1 - r0
    den = _cross2(d1, d2)
    scale = max(abs(d1), abs(d2), 1.0)
    if abs(den) < 1e-14 * scale * scale:
        # parallel: collinear overlaps only occur through shared endpoints here
        if abs(_cross2(r0 - p0, d1)) > 1e-12 * scale * scale:
            return []
        pts = []
        for c in (p0, p1, r0, r1):
            on_p = abs(abs(c - p0) + abs(c - p1) - abs(d1)) < 1e-9 * scale
            on_r = abs(abs(c - r0) + abs(c - r1) - abs(d2)) < 1e-9 * scale
            if on_p and on_r:
                pts.append(c)
        return pts
    t = _cross2(r0 - p0, d2) / den
    u = _cross2(r0 - p0, d1) / den
    eps = 1e-12
    if -eps <= t <= 1 + eps and -eps <= u <= 1 + eps:
        return [p0 + t * d1]
    return []


@dataclass(frozen=True)
class ClosureIntersection:
    """Shared points of two fiber closures: anchor indices plus any other crossings."""

    anchors: tuple[int, ...]
    crossings: tuple[complex, ...] = ()

    def label(self) -> str:
        parts = [f"q{a}" for a in self.anchors] + [f"({c.real:.6g},{c.imag:.6g})" for c in self.crossings]
        return "{" + " ".join(parts) + "}"


def closure_intersection(spec_a: FiberSpec, spec_b: FiberSpec) -> ClosureIntersection:
    """Intersection of the closures of two fibers, computed from their segments.

    Rays are truncated at a large radius; the point at infinity is added when
    both closures contain it.
    """
    q = anchors(spec_a.ell)
    found: list[complex] = []
    for s0, s1 in _segments(spec_a):
        for t0, t1 in _segments(spec_b):
            found.extend(_segment_intersections(s0, s1, t0, t1))
    hit_anchors: set[int] = set()
    crossings: list[complex] = []
    for p in found:
        near = [i for i in range(spec_a.ell) if np.isfinite(q[i]) and abs(p - q[i]) < 1e-9]
        if near:
            hit_anchors.add(near[0])
        elif abs(p) < 0.5 * RAY_LENGTH and not any(abs(p - c) < 1e-9 for c in crossings):
            crossings.append(p)
    if spec_a.is_ray and spec_b.is_ray:
        hit_anchors.add(spec_a.ell - 1)
    return ClosureIntersection(tuple(sorted(hit_anchors)), tuple(crossings))


def symbolic_intersection(coupling: CouplingSpec, i: int, s: int) -> tuple[int, ...] | None:
    """Anchors shared by the closures of fibers of groups ``i`` and ``s`` by case analysis.

    Valid for a labeling whose blocks are contiguous and ordered so that
    :func:`block_order_violations` is empty, with angles decreasing in the
    group index.  Returns ``None`` when the pair falls outside every case
    of the analysis (which signals an unordered coupling).
    """
    r = coupling.r
    if i == s:
        return tuple(sorted({i, r[i]}))
    if r[i] > r[s]:
        i, s = s, i
    block_of = {}
    for b, blk in enumerate(coupling.blocks()):
        for x in blk:
            block_of[x] = b
    if block_of[i] != block_of[s]:
        return ()
    if r[i] == r[s]:
        return (r[i],)
    top = max(x for x in range(coupling.ell) if block_of[x] == block_of[i])
    if i == top:
        if not s < r[s]:
            return None
        out = set()
        if r[i] == s:
            out.add(s)
        if r[s] == top:
            out.add(i)
        return tuple(sorted(out))
    if s == top:
        return () if i < r[i] < r[s] < s else None
    if i < r[i] <= s < r[s]:
        return (s,) if r[i] == s else ()
    if s < i < r[i] < r[s]:
        return ()
    return None


@dataclass(frozen=True)
class IntersectionRow:
    group_a: int
    group_b: int
    theta_a: float
    theta_b: float
    geometric: ClosureIntersection
    symbolic: tuple[int, ...] | None

    @property
    def match(self) -> bool:
        return self.symbolic is not None and not self.geometric.crossings and (
            self.geometric.anchors == self.symbolic
        )


@dataclass(frozen=True)
class IntersectionTable:
    rows: tuple[IntersectionRow, ...]
    ordered: bool
    violations: tuple[tuple[int, int], ...] = field(default=())

    @property
    def all_match(self) -> bool:
        return all(row.match for row in self.rows)

    def write_csv(self, stream: TextIO) -> None:
        """CSV with header ``group_a,group_b,theta_a,theta_b,geometric,symbolic,match``."""
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["group_a", "group_b", "theta_a", "theta_b", "geometric", "symbolic", "match"])
        for row in self.rows:
            sym = "undefined" if row.symbolic is None else "{" + " ".join(f"q{a}" for a in row.symbolic) + "}"
            w.writerow(
                [row.group_a, row.group_b, repr(row.theta_a), repr(row.theta_b), row.geometric.label(), sym, int(row.match)]
            )

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def intersection_table(
    coupling: CouplingSpec,
    angles: Sequence[tuple[float, float]] | None = None,
    require_order: bool = True,
) -> IntersectionTable:
    """Closure intersections for every pair of group fibers, geometric and by case analysis.

    Each group gets two angles (first for pairs with other groups, both for
    the pair of two vortices inside one group).  The coupling must already be
    relabeled so that blocks are contiguous and ordered; set
    ``require_order=False`` to tabulate an unordered coupling anyway.
    """
    if not all(b == list(range(min(b), max(b) + 1)) for b in coupling.blocks()):
        if require_order:
            raise FiberError("blocks must be contiguous ranges of labels")
    bad = tuple(block_order_violations(coupling))
    if bad and require_order:
        raise FiberError(f"labeling violates the nesting order at pairs {list(bad)}")
    ell = coupling.ell
    angles = default_group_angles(ell) if angles is None else tuple(tuple(a) for a in angles)  # type: ignore[assignment]
    if len(angles) != ell:
        raise FiberError("one angle pair per group is required")
    rows = []
    for a in range(ell):
        for b in range(a, ell):
            th_a = angles[a][0]
            th_b = angles[b][1] if a == b else angles[b][0]
            fa = group_fiber(coupling, a, th_a)
            fb = group_fiber(coupling, b, th_b)
            rows.append(
                IntersectionRow(a, b, th_a, th_b, closure_intersection(fa, fb), symbolic_intersection(coupling, a, b))
            )
    return IntersectionTable(tuple(rows), not bad, bad)
