"""Point-vortex Hamiltonian flow and its conservation diagnostics.

Each vortex moves by ``gamma_j d/dt xi_j = J grad_j H`` where ``H`` is the
reduced Hamiltonian and ``J`` rotates tangent vectors by ``+pi/2`` with
respect to the outward normal (the standard complex rotation on the torus).

Time stepping is explicit (classical Runge-Kutta or the midpoint rule).
Stage points are mapped back to the surface before the vector field is
evaluated, and every accepted step is projected as well: renormalization on
the round models, reduction to the fundamental parallelogram on the torus.
On the projective plane the flow runs on the sphere double cover, so vortex
positions are not canonicalized during integration.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, TextIO

import numpy as np

from .energy import (
    Background,
    SourceSet,
    VortexConfig,
    ensure_admissible,
    grad_hamiltonian,
    gradient_kernel,
    hamiltonian_reduced,
)
from .surface import FloatArray, SingularityError, Surface

DEFAULT_MIN_SEPARATION = 1e-6
STATUS_COMPLETED = "completed"
STATUS_COLLISION = "collision"


def velocity(
    config: VortexConfig, sources: SourceSet | None = None, bg: Background | None = None
) -> FloatArray:
    """Vortex velocities ``v_j = J grad_j H / gamma_j``, shape ``(N, dim)``."""
    grad = grad_hamiltonian(config, sources, bg)
    rotated = config.surface.rotate(config.positions, grad)
    return rotated / config.strengths[:, None]


def _to_surface(surface: Surface, x: FloatArray) -> FloatArray:
    """Map an ambient point back onto the surface without canonicalizing lifts."""
    if surface.dim == 3:
        return x / np.linalg.norm(x, axis=-1, keepdims=True)
    return surface.canonical(x)


def _moment(surface: Surface, x: FloatArray, gamma: FloatArray) -> FloatArray:
    if surface.dim != 3:
        return np.zeros(0)
    return gamma @ x


def _min_separation(config: VortexConfig, sources: SourceSet) -> float:
    s = config.surface
    x = config.positions
    best = np.inf
    n = len(config)
    if n > 1:
        j, k = np.triu_indices(n, k=1)
        best = min(best, float(np.min(s.distance(x[j], x[k]))))
    if len(sources):
        best = min(best, float(np.min(s.distance(x[:, None, :], sources.positions[None, :, :]))))
    return best


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the vortex flow.

    Attributes
    ----------
    times
        Increasing sample times, shape ``(T,)``.
    positions
        Vortex positions at each time, shape ``(T, N, dim)``.
    strengths
        Vortex strengths, shape ``(N,)``.
    energies
        Reduced Hamiltonian at each time, shape ``(T,)``.
    moments
        ``sum_j gamma_j xi_j`` at each time on the round models, shape
        ``(T, 3)``; shape ``(T, 0)`` on the torus.
    status
        ``"completed"`` or ``"collision"`` when integration halted because
        two points came closer than ``min_separation``.
    """

    surface: Surface
    times: FloatArray
    positions: FloatArray
    strengths: FloatArray
    energies: FloatArray
    moments: FloatArray
    status: str = STATUS_COMPLETED
    message: str = field(default="", compare=False)

    def __len__(self) -> int:
        return int(self.times.shape[0])

    @property
    def halted(self) -> bool:
        return self.status != STATUS_COMPLETED

    @property
    def final(self) -> VortexConfig:
        return VortexConfig(self.surface, self.positions[-1], self.strengths)

    def state(self, index: int) -> VortexConfig:
        return VortexConfig(self.surface, self.positions[index], self.strengths)

    def header(self) -> list[str]:
        """CSV header: ``t``, coordinates ``x{j}_{c}``, ``energy``, ``moment_{c}``."""
        n, dim = self.positions.shape[1:]
        cols = ["t"]
        cols += [f"x{j}_{c}" for j in range(n) for c in range(dim)]
        cols.append("energy")
        cols += [f"moment_{c}" for c in range(self.moments.shape[1])]
        return cols

    def write_csv(self, stream: TextIO) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(self.header())
        flat = self.positions.reshape(len(self), -1)
        for t, row, e, m in zip(self.times, flat, self.energies, self.moments):
            writer.writerow([repr(float(v)) for v in (t, *row, e, *m)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


Field = Callable[[FloatArray], FloatArray]


def _rk4_step(f: Field, to_surface: Callable[[FloatArray], FloatArray], x: FloatArray, h: float) -> FloatArray:
    k1 = f(x)
    k2 = f(to_surface(x + 0.5 * h * k1))
    k3 = f(to_surface(x + 0.5 * h * k2))
    k4 = f(to_surface(x + h * k3))
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _midpoint_step(f: Field, to_surface: Callable[[FloatArray], FloatArray], x: FloatArray, h: float) -> FloatArray:
    return x + h * f(to_surface(x + 0.5 * h * f(x)))


_STEPPERS = {"rk4": _rk4_step, "midpoint": _midpoint_step}


def integrate(
    config: VortexConfig,
    sources: SourceSet | None = None,
    bg: Background | None = None,
    t_end: float = 1.0,
    step: float = 1e-3,
    method: str = "rk4",
    backward: bool = False,
    min_separation: float = DEFAULT_MIN_SEPARATION,
    record_every: int = 1,
) -> Trajectory:
    """Integrate the vortex flow from ``config`` up to time ``t_end``.

    Parameters
    ----------
    t_end, step
        Horizon and fixed step size, both positive.  The last step is
        shortened so that the horizon is hit exactly.
    method
        ``"rk4"`` or ``"midpoint"``.
    backward
        Integrate the flow backward in time; recorded times then decrease
        from 0 to ``-t_end``.
    min_separation
        Integration halts with status ``"collision"`` once any vortex pair,
        or vortex and source, comes closer than this.
    record_every
        Keep every ``record_every``-th step (the final state is always kept).
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if method not in _STEPPERS:
        raise ValueError(f"unknown method {method!r}; expected one of {sorted(_STEPPERS)}")
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    sources = sources if sources is not None else SourceSet.empty(config.surface.dim)
    ensure_admissible(config, sources)
    surface = config.surface
    gamma = config.strengths
    sign = -1.0 if backward else 1.0
    stepper = _STEPPERS[method]

    def to_surface(x: FloatArray) -> FloatArray:
        return _to_surface(surface, x)

    def f(x: FloatArray) -> FloatArray:
        grad = gradient_kernel(surface, x, gamma, sources, bg)
        return (sign / gamma)[:, None] * surface.rotate(x, grad)

    def record(t: float, x: FloatArray) -> None:
        c = config.with_positions(x)
        times.append(sign * t)
        states.append(x.copy())
        energies.append(hamiltonian_reduced(c, sources, bg))
        moments.append(_moment(surface, x, gamma))

    times: list[float] = []
    states: list[FloatArray] = []
    energies: list[float] = []
    moments: list[FloatArray] = []
    x = config.positions.copy()
    record(0.0, x)
    n_steps = int(np.ceil(t_end / step - 1e-12))
    status, message = STATUS_COMPLETED, ""
    for n in range(1, n_steps + 1):
        t_prev = (n - 1) * step
        h = min(step, t_end - t_prev)
        try:
            x = to_surface(stepper(f, to_surface, x, h))
            sep = _min_separation(config.with_positions(x), sources)
        except SingularityError as err:
            status, message = STATUS_COLLISION, str(err)
            break
        if sep < min_separation:
            status = STATUS_COLLISION
            message = f"separation {sep:.3e} below {min_separation:g} at t={sign * (t_prev + h):.6g}"
            record(t_prev + h, x)
            break
        if n % record_every == 0 or n == n_steps:
            record(t_prev + h, x)
    return Trajectory(
        surface=surface,
        times=np.asarray(times),
        positions=np.asarray(states),
        strengths=gamma.copy(),
        energies=np.asarray(energies),
        moments=np.asarray(moments).reshape(len(times), -1),
        status=status,
        message=message,
    )


def relative_energy_drift(traj: Trajectory) -> float:
    """``max_t |H(t) - H(0)| / (1 + |H(0)|)``."""
    e0 = traj.energies[0]
    return float(np.max(np.abs(traj.energies - e0)) / (1.0 + abs(e0)))


def moment_drift(traj: Trajectory) -> float:
    """Largest deviation of the moment vector from its initial value."""
    if traj.moments.shape[1] == 0:
        return 0.0
    return float(np.max(np.linalg.norm(traj.moments - traj.moments[0], axis=1)))
