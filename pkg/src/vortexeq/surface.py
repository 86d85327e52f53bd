"""Closed surface models and their Green's functions.

Three constant-curvature models are provided:

* :class:`UnitSphere` -- points are unit 3-vectors.
* :class:`FlatTorus` -- the quotient ``C / (Z + tau Z)``; points are stored as
  real 2-vectors ``(x, y)`` reduced to the fundamental parallelogram.
* :class:`ProjectivePlane` -- the unit sphere modulo ``x ~ -x`` with the
  induced round metric (area ``2*pi``).  Points are unit 3-vectors; any lift
  is accepted by the geometric routines, :meth:`Surface.canonical` picks the
  lift whose first nonzero coordinate is positive.

Green's functions solve ``-Lap G(., p) = delta_p - 1/|Sigma|`` and are
normalised to have zero mean.  The regular part is
``H(x, p) = G(x, p) + log(d(x, p)) / (2 pi)``.

All routines broadcast over leading axes: a point array has shape
``(..., dim)`` with ``dim == 3`` on the sphere models and ``dim == 2`` on the
torus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import exp1

FloatArray = NDArray[np.float64]

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi
COLLISION_TOL = 1e-9
UNIT_TOL = 1e-12


class InvalidPointError(ValueError):
    """A point does not lie on the surface."""


class SingularityError(ValueError):
    """Evaluation at (or within collision tolerance of) a singular point."""


def _norm(v: FloatArray) -> FloatArray:
    return np.sqrt(np.sum(v * v, axis=-1))


def _unit(x: FloatArray) -> FloatArray:
    """Normalize rows, leaving rows already unit to rounding untouched (keeps canonical forms idempotent)."""
    n = _norm(x)[..., None]
    return np.where(np.abs(n - 1.0) <= 4e-16, x, x / n)


def _dot(a: FloatArray, b: FloatArray) -> FloatArray:
    return np.sum(a * b, axis=-1)


def _cross(a: FloatArray, b: FloatArray) -> FloatArray:
    # explicit components; np.cross carries heavy per-call overhead on small arrays
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], axis=-1)


class Surface:
    """Common interface of the surface models.

    Subclasses set ``kind``, ``dim``, ``area`` and ``euler_characteristic``
    and implement the geometric kernels.
    """

    kind: str
    dim: int
    area: float
    euler_characteristic: int
    collision_tol: float = COLLISION_TOL

    # -- geometry -----------------------------------------------------------
    def curvature(self, x: ArrayLike) -> FloatArray:
        """Gaussian curvature (constant for every model here)."""
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], self._curvature)

    _curvature: float = 0.0

    def validate(self, x: ArrayLike) -> FloatArray:
        raise NotImplementedError

    def canonical(self, x: ArrayLike) -> FloatArray:
        raise NotImplementedError

    def distance(self, x: ArrayLike, y: ArrayLike) -> FloatArray:
        raise NotImplementedError

    def project(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        """Orthogonal projection of an ambient vector onto ``T_x``."""
        raise NotImplementedError

    def retract(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        """Move ``x`` by tangent vector ``v`` and map back onto the surface."""
        raise NotImplementedError

    def frame(self, x: ArrayLike) -> FloatArray:
        """Orthonormal tangent frame at ``x``, shape ``(..., dim, 2)``."""
        raise NotImplementedError

    def rotate(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        """Rotate tangent vector ``v`` at ``x`` by ``+pi/2``."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> FloatArray:
        """``n`` points drawn uniformly with respect to area."""
        raise NotImplementedError

    # -- Green's function ---------------------------------------------------
    def green(self, x: ArrayLike, p: ArrayLike) -> FloatArray:
        raise NotImplementedError

    def green_regular(self, x: ArrayLike, p: ArrayLike) -> FloatArray:
        raise NotImplementedError

    def grad_green(self, x: ArrayLike, p: ArrayLike) -> FloatArray:
        """Gradient of ``G(., p)`` at ``x`` as a tangent vector."""
        raise NotImplementedError

    def regular_diagonal(self) -> float:
        """``H(x, x)``; constant because every model is homogeneous."""
        raise NotImplementedError

    def _check_separated(self, d: FloatArray) -> None:
        if np.any(d < self.collision_tol):
            raise SingularityError(
                f"points closer than collision tolerance {self.collision_tol:g}"
                f" (min distance {float(np.min(d)):.3e})"
            )


# ---------------------------------------------------------------------------
# round sphere kernels, shared by the sphere and projective-plane models


def _sphere_green_from_chord2(c2: FloatArray) -> FloatArray:
    # 1 - x.p = |x - p|^2 / 2, written through the chord to avoid cancellation
    return -(np.log(c2 / 4.0) + 1.0) / FOUR_PI


def _sphere_regular_from_angle(theta: FloatArray, c2: FloatArray) -> FloatArray:
    chord = np.sqrt(c2)
    small = chord < 1e-6
    safe = np.where(small, 1.0, chord)
    ratio = np.where(small, 2.0 * (1.0 + theta * theta / 24.0), 2.0 * theta / safe)
    return np.log(ratio) / TWO_PI - 1.0 / FOUR_PI


def _sphere_angle(x: FloatArray, y: FloatArray) -> FloatArray:
    return np.arctan2(_norm(_cross(x, y)), _dot(x, y))


def _sphere_grad_green(x: FloatArray, p: FloatArray) -> FloatArray:
    c2 = np.sum((x - p) ** 2, axis=-1)
    t = _dot(x, p)
    return (p - t[..., None] * x) / (TWO_PI * c2[..., None])


class _RoundModel(Surface):
    dim = 3
    _curvature = 1.0

    def validate(self, x: ArrayLike) -> FloatArray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (3,):
            raise InvalidPointError(f"expected 3-vectors, got shape {x.shape}")
        if np.any(np.abs(_norm(x) - 1.0) > UNIT_TOL * 1e3):
            raise InvalidPointError("point is not a unit vector")
        return x

    def project(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        return v - _dot(v, x)[..., None] * x

    def retract(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        y = np.asarray(x, dtype=float) + np.asarray(v, dtype=float)
        return y / _norm(y)[..., None]

    def frame(self, x: ArrayLike) -> FloatArray:
        x = np.asarray(x, dtype=float)
        # helper axis least aligned with x, so the construction never degenerates
        axis = np.argmin(np.abs(x), axis=-1)
        a = np.zeros_like(x)
        np.put_along_axis(a, axis[..., None], 1.0, axis=-1)
        e1 = a - _dot(a, x)[..., None] * x
        e1 /= _norm(e1)[..., None]
        e2 = _cross(x, e1)
        return np.stack([e1, e2], axis=-1)

    def rotate(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        return _cross(np.asarray(x, dtype=float), np.asarray(v, dtype=float))

    def _unit_sample(self, rng: np.random.Generator, n: int) -> FloatArray:
        y = rng.standard_normal((n, 3))
        return y / _norm(y)[:, None]


@dataclass(frozen=True)
class UnitSphere(_RoundModel):
    """Round unit sphere, area ``4 pi``, curvature 1."""

    kind: str = field(default="sphere", init=False)
    area: float = field(default=FOUR_PI, init=False)
    euler_characteristic: int = field(default=2, init=False)

    def canonical(self, x: ArrayLike) -> FloatArray:
        return _unit(np.asarray(x, dtype=float))

    def distance(self, x: ArrayLike, y: ArrayLike) -> FloatArray:
        return _sphere_angle(np.asarray(x, float), np.asarray(y, float))

    def sample(self, rng: np.random.Generator, n: int) -> FloatArray:
        return self._unit_sample(rng, n)

    def green(self, x: ArrayLike, p: ArrayLike) -> FloatArray:
        x = np.asarray(x, float)
        p = np.asarray(p, float)
        self._check_separated(self.distance(x, p))
        return _sphere_green_from_chord2(np.sum((x - p) ** 2, axis=-1))

    def green_regular(self, x: ArrayLike, p: ArrayLike) -> FloatArray:
        x = np.asarray(x, float)
        p = np.asarray(p, float)
        return _sphere_regular_from_angle(
            _sphere_angle(x, p), np.sum((x - p) ** 2, axis=-1)
        )

    def grad_green(self, x: ArrayLike, p: ArrayLike) -> FloatArray:
        x = np.asarray(x, float)
        p = np.asarray(p, float)
        self._check_separated(self.distance(x, p))
        return _sphere_grad_green(x, p)

    def regular_diagonal(self) -> float:
        return math.log(2.0) / TWO_PI - 1.0 / FOUR_PI


@dataclass(frozen=True)
class ProjectivePlane(_RoundModel):
    """Real projective plane as the antipodal quotient of the unit sphere.

    The Green's function is the sum of the sphere Green's function over the
    two lifts of the pole; that sum already has zero mean, so no extra
    constant is needed.
    """

    kind: str = field(default="projective_plane", init=False)
    area: float = field(default=TWO_PI, init=False)
    euler_characteristic: int = field(default=1, init=False)

    def canonical(self, x: ArrayLike) -> FloatArray:
        x = _unit(np.asarray(x, dtype=float))
        nz = x != 0.0
        first = np.argmax(nz, axis=-1)
        lead = np.take_along_axis(x, first[..., None], axis=-1)
        return np.where(lead < 0.0, -x, x)

    def distance(self, x: ArrayLike, y: ArrayLike) -> FloatArray:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return np.arctan2(_norm(_cross(x, y)), np.abs(_dot(x, y)))

    def sample(self, rng: np.random.Generator, n: int) -> FloatArray:
        return self.canonical(self._unit_sample(rng, n))

    def green(self, x: ArrayLike, p: ArrayLike) -> FloatArray:
        x = np.asarray(x, float)
        p = np.asarray(p, float)
        self._check_separated(self.distance(x, p))
        return _sphere_green_from_chord2(
            np.sum((x - p) ** 2, axis=-1)
        ) + _sphere_green_from_chord2(np.sum((x + p) ** 2, axis=-1))

    def green_regular(self, x: ArrayLike, p: ArrayLike) -> FloatArray:
        x = np.asarray(x, float)
        p = np.asarray(p, float)
        # nearest lift carries the log singularity, the far one is smooth
        s = np.where(_dot(x, p) < 0.0, -1.0, 1.0)[..., None]
        near = s * p
        return _sphere_regular_from_angle(
            _sphere_angle(x, near), np.sum((x - near) ** 2, axis=-1)
        ) + _sphere_green_from_chord2(np.sum((x + near) ** 2, axis=-1))

    def grad_green(self, x: ArrayLike, p: ArrayLike) -> FloatArray:
        x = np.asarray(x, float)
        p = np.asarray(p, float)
        self._check_separated(self.distance(x, p))
        return _sphere_grad_green(x, p) + _sphere_grad_green(x, -p)

    def regular_diagonal(self) -> float:
        return math.log(2.0) / TWO_PI - 1.0 / TWO_PI


# ---------------------------------------------------------------------------
# flat torus


def _ein(x: FloatArray) -> FloatArray:
    """``E1(x) + log(x)``, continuous at ``x = 0`` where it equals ``-gamma``."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-2
    xs = np.where(small, x, 0.0)
    # -gamma + x - x^2/4 + x^3/18 - x^4/96 + x^5/600
    series = -np.euler_gamma + xs * (
        1.0 + xs * (-0.25 + xs * (1.0 / 18.0 + xs * (-1.0 / 96.0 + xs / 600.0)))
    )
    xl = np.where(small, 1.0, x)
    return np.where(small, series, exp1(xl) + np.log(xl))


@dataclass(frozen=True)
class FlatTorus(Surface):
    """Flat torus ``C / (Z + tau Z)`` with ``Im tau > 0``.

    Parameters
    ----------
    tau : complex
        Lattice modulus.
    method : {"ewald", "theta"}
        ``"ewald"`` evaluates G by an Ewald-split lattice sum (real-space
        exponential-integral terms plus reciprocal Gaussian-damped terms).
        ``"theta"`` uses the Jacobi theta-function closed form.  Both carry
        the same mean-zero constant.
    cutoff : float
        Lattice terms whose Gaussian / exponential-integral weight is below
        ``exp(-cutoff)`` are dropped (the default keeps ~1e-17 relative).
    """

    tau: complex = 1j
    method: Literal["ewald", "theta"] = "ewald"
    cutoff: float = 40.0
    kind: str = field(default="torus", init=False)
    dim = 2
    euler_characteristic: int = field(default=0, init=False)

    def __post_init__(self) -> None:
        tau = complex(self.tau)
        if not tau.imag > 0:
            raise ValueError("torus modulus must satisfy Im tau > 0")
        object.__setattr__(self, "tau", tau)
        if self.method not in ("ewald", "theta"):
            raise ValueError(f"unknown torus Green method {self.method!r}")

    @property
    def area(self) -> float:  # type: ignore[override]
        return self.tau.imag

    # -- lattice bookkeeping ------------------------------------------------
    @cached_property
    def _basis(self) -> FloatArray:
        return np.array([[1.0, 0.0], [self.tau.real, self.tau.imag]])

    @cached_property
    def _eta2(self) -> float:
        return math.pi / self.area

    def _lattice(self, radius: float, basis: FloatArray) -> FloatArray:
        gram_min = min(np.linalg.norm(basis[0]), np.linalg.norm(basis[1]))
        height = abs(np.linalg.det(basis)) / max(
            np.linalg.norm(basis[0]), np.linalg.norm(basis[1])
        )
        m = int(math.ceil(radius / min(gram_min, height))) + 1
        r = np.arange(-m, m + 1)
        a, b = np.meshgrid(r, r, indexing="ij")
        pts = a.ravel()[:, None] * basis[0] + b.ravel()[:, None] * basis[1]
        return pts[np.sum(pts * pts, axis=1) <= radius * radius]

    @cached_property
    def _real_shifts(self) -> FloatArray:
        # displacements are minimal images, so |r| <= half the cell diagonal
        diam = float(np.linalg.norm(self._basis[0] + self._basis[1]))
        radius = math.sqrt(self.cutoff / self._eta2) + diam
        return self._lattice(radius, self._basis)

    @cached_property
    def _recip(self) -> tuple[FloatArray, FloatArray]:
        rb = TWO_PI * np.linalg.inv(self._basis).T
        k = self._lattice(2.0 * math.sqrt(self.cutoff * self._eta2), rb)
        k2 = np.sum(k * k, axis=1)
        keep = k2 > 0
        k, k2 = k[keep], k2[keep]
        return k, np.exp(-k2 / (4.0 * self._eta2)) / k2

    @cached_property
    def _ewald_const(self) -> float:
        k, w = self._recip
        del k
        return -1.0 / (4.0 * self._eta2 * self.area)

    # -- points -------------------------------------------------------------
    def to_complex(self, x: ArrayLike) -> NDArray[np.complex128]:
        x = np.asarray(x, dtype=float)
        return x[..., 0] + 1j * x[..., 1]

    def from_complex(self, z: ArrayLike) -> FloatArray:
        z = np.asarray(z, dtype=complex)
        return np.stack([z.real, z.imag], axis=-1)

    def _coords(self, x: FloatArray) -> FloatArray:
        # lattice coordinates (s, t) with x = s*1 + t*tau
        t = x[..., 1] / self.tau.imag
        s = x[..., 0] - t * self.tau.real
        return np.stack([s, t], axis=-1)

    def _from_coords(self, st: FloatArray) -> FloatArray:
        return st[..., :1] * self._basis[0] + st[..., 1:] * self._basis[1]

    def validate(self, x: ArrayLike) -> FloatArray:
        x = np.asarray(x, dtype=float)
        if np.iscomplexobj(x):
            raise InvalidPointError("pass torus points as real (x, y) pairs")
        if x.shape[-1:] != (2,):
            raise InvalidPointError(f"expected 2-vectors, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InvalidPointError("non-finite torus point")
        return x

    def canonical(self, x: ArrayLike) -> FloatArray:
        st = self._coords(np.asarray(x, dtype=float))
        st = st - np.floor(st)
        st = np.where(st >= 1.0, 0.0, st)
        return self._from_coords(st)

    def min_image(self, d: ArrayLike) -> FloatArray:
        """Shortest representative of a displacement modulo the lattice."""
        d = np.asarray(d, dtype=float)
        st = self._coords(d)
        st = st - np.round(st)
        base = self._from_coords(st)
        r = np.arange(-2, 3)
        a, b = np.meshgrid(r, r, indexing="ij")
        shifts = a.ravel()[:, None] * self._basis[0] + b.ravel()[:, None] * self._basis[1]
        cand = base[..., None, :] + shifts
        best = np.argmin(np.sum(cand * cand, axis=-1), axis=-1)
        return np.take_along_axis(cand, best[..., None, None], axis=-2)[..., 0, :]

    def distance(self, x: ArrayLike, y: ArrayLike) -> FloatArray:
        d = self.min_image(np.asarray(x, float) - np.asarray(y, float))
        return _norm(d)

    def project(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        return np.asarray(v, dtype=float) + 0.0 * np.asarray(x, dtype=float)

    def retract(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        return self.canonical(np.asarray(x, float) + np.asarray(v, float))

    def frame(self, x: ArrayLike) -> FloatArray:
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(2), x.shape[:-1] + (2, 2)).copy()

    def rotate(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        v = np.asarray(v, dtype=float)
        return np.stack([-v[..., 1], v[..., 0]], axis=-1)

    def sample(self, rng: np.random.Generator, n: int) -> FloatArray:
        return self._from_coords(rng.random((n, 2)))

    # -- Green's function ---------------------------------------------------
    def _reciprocal_sum(self, r: FloatArray) -> FloatArray:
        k, w = self._recip
        return np.cos(r @ k.T) @ w / self.area

    def _ewald_real(self, r: FloatArray, skip_origin: bool) -> FloatArray:
        d = r[..., None, :] + self._real_shifts
        d2 = np.sum(d * d, axis=-1)
        x = self._eta2 * d2
        if skip_origin:
            origin = np.all(self._real_shifts == 0.0, axis=-1)
            x = np.where(origin, np.inf, x)
        return np.sum(exp1(x), axis=-1) / FOUR_PI

    def _green_ewald(self, r: FloatArray) -> FloatArray:
        return self._ewald_real(r, False) + self._reciprocal_sum(r) + self._ewald_const

    def _regular_ewald(self, r: FloatArray) -> FloatArray:
        # the origin term E1(eta^2 r^2)/4pi is replaced by its log-regularised form
        r2 = np.sum(r * r, axis=-1)
        head = (_ein(self._eta2 * r2) - math.log(self._eta2)) / FOUR_PI
        return (
            head
            + self._ewald_real(r, True)
            + self._reciprocal_sum(r)
            + self._ewald_const
        )

    def _grad_ewald(self, r: FloatArray) -> FloatArray:
        d = r[..., None, :] + self._real_shifts
        d2 = np.sum(d * d, axis=-1)
        real = -np.sum(
            (np.exp(-self._eta2 * d2) / (TWO_PI * d2))[..., None] * d, axis=-2
        )
        k, w = self._recip
        rec = -(np.sin(r @ k.T) * w) @ k / self.area
        return real + rec

    # theta-function route
    @cached_property
    def _theta_data(self) -> tuple[complex, NDArray[np.complex128], float]:
        q = np.exp(1j * math.pi * self.tau)
        n = np.arange(0, 64)
        coef = (-1.0) ** n * q ** (n * (n + 1))
        coef = coef[np.abs(coef) > 1e-300]
        m = np.arange(1, 200)
        qm = np.abs(q) ** (2 * m)
        s = float(np.sum(np.log(np.abs(1.0 - q ** (2 * m[qm > 1e-18])))))
        const = -self.area / 24.0 + s / TWO_PI
        return q, coef, const

    def _log_theta_over_z(self, z: NDArray[np.complex128]) -> FloatArray:
        # log |theta_1(pi z | tau) / z|, smooth through z = 0
        q, coef, _ = self._theta_data
        k = 2 * np.arange(coef.size) + 1
        # sin(k pi z) / z = k pi sinc(k z)
        terms = coef * k * math.pi * np.sinc(z[..., None] * k)
        return np.log(np.abs(2.0 * q**0.25 * np.sum(terms, axis=-1)))

    def _green_theta(self, r: FloatArray) -> FloatArray:
        z = self.to_complex(r)
        _, _, const = self._theta_data
        return (
            -(self._log_theta_over_z(z) + np.log(np.abs(z))) / TWO_PI
            + z.imag**2 / (2.0 * self.area)
            + const
        )

    def _regular_theta(self, r: FloatArray) -> FloatArray:
        z = self.to_complex(r)
        _, _, const = self._theta_data
        return -self._log_theta_over_z(z) / TWO_PI + z.imag**2 / (2.0 * self.area) + const

    def _grad_theta(self, r: FloatArray) -> FloatArray:
        z = self.to_complex(r)
        q, coef, _ = self._theta_data
        k = 2 * np.arange(coef.size) + 1
        u = math.pi * z[..., None] * k
        num = np.sum(coef * k * np.cos(u), axis=-1)
        den = np.sum(coef * np.sin(u), axis=-1)
        g = math.pi * num / den  # d/dz log theta_1(pi z)
        # grad of log|f| for holomorphic f is (Re f'/f, -Im f'/f)
        gx = -g.real / TWO_PI
        gy = g.imag / TWO_PI + z.imag / self.area
        return np.stack([gx, gy], axis=-1)

    def _displacement(self, x: ArrayLike, p: ArrayLike) -> FloatArray:
        return self.min_image(np.asarray(x, float) - np.asarray(p, float))

    def green(self, x: ArrayLike, p: ArrayLike) -> FloatArray:
        r = self._displacement(x, p)
        self._check_separated(_norm(r))
        return self._green_theta(r) if self.method == "theta" else self._green_ewald(r)

    def green_regular(self, x: ArrayLike, p: ArrayLike) -> FloatArray:
        r = self._displacement(x, p)
        if self.method == "theta":
            return self._regular_theta(r)
        return self._regular_ewald(r)

    def grad_green(self, x: ArrayLike, p: ArrayLike) -> FloatArray:
        r = self._displacement(x, p)
        self._check_separated(_norm(r))
        return self._grad_theta(r) if self.method == "theta" else self._grad_ewald(r)

    def regular_diagonal(self) -> float:
        return float(self.green_regular(np.zeros(2), np.zeros(2)))


# ---------------------------------------------------------------------------
# module-level API


def make_surface(kind: str, **params) -> Surface:
    """Build a surface from its kind name (``sphere``, ``torus``, ``projective_plane``)."""
    kind = kind.lower().replace("-", "_")
    if kind in ("sphere", "unit_sphere", "s2"):
        return UnitSphere()
    if kind in ("torus", "flat_torus"):
        tau = params.get("tau", 1j)
        if isinstance(tau, (list, tuple)):
            tau = complex(tau[0], tau[1])
        return FlatTorus(tau=complex(tau), **{k: v for k, v in params.items() if k != "tau"})
    if kind in ("projective_plane", "rp2"):
        return ProjectivePlane()
    raise ValueError(f"unknown surface kind {kind!r}")


def geodesic_distance(surface: Surface, x: ArrayLike, y: ArrayLike) -> FloatArray:
    """Riemannian distance between points of ``surface``."""
    return surface.distance(surface.validate(x), surface.validate(y))


def greens(surface: Surface, x: ArrayLike, p: ArrayLike) -> FloatArray:
    """Mean-zero Green's function of ``-Lap`` with pole at ``p``, evaluated at ``x``."""
    return surface.green(surface.validate(x), surface.validate(p))


def greens_regular(surface: Surface, x: ArrayLike, p: ArrayLike) -> FloatArray:
    """Regular part ``G(x, p) + log d(x, p) / 2pi``, continuous across ``x = p``."""
    return surface.green_regular(surface.validate(x), surface.validate(p))


def grad_greens(surface: Surface, x: ArrayLike, p: ArrayLike) -> FloatArray:
    """Tangent gradient in ``x`` of ``G(x, p)``."""
    return surface.grad_green(surface.validate(x), surface.validate(p))


# ---------------------------------------------------------------------------
# stereographic utilities (projection from the north pole (0, 0, 1))


def _is_inf(z: ArrayLike) -> NDArray[np.bool_]:
    z = np.asarray(z, dtype=complex)
    return ~np.isfinite(z)


def stereo_distance(z: ArrayLike, w: ArrayLike) -> FloatArray:
    """Distance in the metric ``4 |dz|^2 / (1 + |z|^2)^2``; ``inf`` is the north pole.

    Uses ``d = 2 atan2(|z - w|, |1 + conj(z) w|)``, which equals the great-circle
    distance between the inverse stereographic images and stays accurate near
    antipodal pairs.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    zi, wi = _is_inf(z), _is_inf(w)
    zf = np.where(zi, 0.0, z)
    wf = np.where(wi, 0.0, w)
    finite = 2.0 * np.arctan2(np.abs(zf - wf), np.abs(1.0 + np.conj(zf) * wf))
    to_inf_z = 2.0 * np.arctan2(1.0, np.abs(wf))
    to_inf_w = 2.0 * np.arctan2(1.0, np.abs(zf))
    out = np.where(zi & wi, 0.0, np.where(zi, to_inf_z, np.where(wi, to_inf_w, finite)))
    return out[()] if out.ndim == 0 else out


def from_stereo(z: ArrayLike) -> FloatArray:
    """Inverse stereographic projection onto the unit sphere."""
    z = np.asarray(z, dtype=complex)
    inf = _is_inf(z)
    zf = np.where(inf, 0.0, z)
    r2 = np.abs(zf) ** 2
    x = np.stack([2 * zf.real, 2 * zf.imag, r2 - 1.0], axis=-1) / (r2 + 1.0)[..., None]
    return np.where(inf[..., None], np.array([0.0, 0.0, 1.0]), x)


def to_stereo(x: ArrayLike) -> NDArray[np.complex128]:
    """Stereographic projection from the north pole; the pole maps to ``inf``."""
    x = np.asarray(x, dtype=float)
    den = 1.0 - x[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (x[..., 0] + 1j * x[..., 1]) / den
    return np.where(den <= 0.0, complex(np.inf, 0.0), z)
