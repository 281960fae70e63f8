"""Orbit generation, resampling and cycle detection."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Optional

import numpy as np

from .errors import (
    Diverged,
    EmptyResult,
    InitOutOfDomain,
    InsufficientSamples,
    ValidationError,
)
from .maps import MapModel

__all__ = [
    "DIVERGENCE_BOUND",
    "DEFAULT_TRANSIENT",
    "Orbit",
    "CycleReport",
    "generate_orbit",
    "sample_orbit",
    "detect_cycle",
    "orbit_chunks",
]

DIVERGENCE_BOUND = 1e6
DEFAULT_TRANSIENT = 1000


@dataclass(frozen=True)
class Orbit:
    """Recorded states of one trajectory.

    ``samples[k]`` is the state after ``transient + k * stride`` iterations of
    ``x0``, so with ``transient=0`` the first sample is ``x0`` itself.
    ``diverged_at`` is the iteration count at which the divergence bound was
    crossed, or ``None`` for a bounded orbit.
    """

    model_name: str
    params: tuple
    x0: tuple
    transient: int
    stride: int
    samples: np.ndarray
    diverged_at: Optional[int] = None

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def diverged(self) -> bool:
        return self.diverged_at is not None

    def component(self, index: int = 0) -> np.ndarray:
        return self.samples[:, index]


@dataclass(frozen=True)
class CycleReport:
    periodic: bool
    period: Optional[int]
    cycle_points: Optional[np.ndarray]
    tolerance: float


def _out_of_bounds(state) -> bool:
    for c in state:
        if not abs(c) <= DIVERGENCE_BOUND:  # also catches nan
            return True
    return False


def generate_orbit(
    model: MapModel,
    params,
    x0,
    n: int,
    transient: int = DEFAULT_TRANSIENT,
    stride: int = 1,
    allow_divergence: bool = False,
) -> Orbit:
    """Iterate ``model`` from ``x0`` and record ``n`` states.

    The first ``transient`` iterations are discarded, then every
    ``stride``-th state is kept. If a component exceeds
    :data:`DIVERGENCE_BOUND` the orbit is truncated; it is returned flagged
    when ``allow_divergence`` is set and raised as :class:`Diverged` (with
    the truncated orbit attached) otherwise.
    """
    p = model.check_params(params)
    s = model.check_state(x0)
    if not model.phase_domain.contains(s):
        raise InitOutOfDomain(f"x0={s} outside {model.phase_domain}")
    if n < 1:
        raise ValidationError("n must be >= 1")
    if transient < 0:
        raise ValidationError("transient must be >= 0")
    if stride < 1:
        raise ValidationError("stride must be >= 1")

    step = model.step
    x0_t = s
    samples = []
    append = samples.append
    it = 0
    diverged_at = None
    for _ in range(transient):
        s = step(p, s)
        it += 1
        if _out_of_bounds(s):
            diverged_at = it
            break
    if diverged_at is None:
        append(s)
        while len(samples) < n:
            for _ in range(stride):
                s = step(p, s)
                it += 1
            if _out_of_bounds(s):
                diverged_at = it
                break
            append(s)

    arr = np.array(samples, dtype=float).reshape(len(samples), model.state_dim)
    orbit = Orbit(model.name, p, x0_t, transient, stride, arr, diverged_at)
    if diverged_at is not None and not allow_divergence:
        raise Diverged(diverged_at, orbit)
    return orbit


def sample_orbit(orbit: Orbit, stride: int, offset: int = 0) -> Orbit:
    """Keep ``samples[offset::stride]``; the metadata tracks the new sampling."""
    if stride < 1:
        raise ValidationError("stride must be >= 1")
    if not 0 <= offset < stride:
        raise ValidationError("offset must satisfy 0 <= offset < stride")
    picked = orbit.samples[offset::stride]
    if len(picked) == 0:
        raise EmptyResult("sampling selected no samples")
    return replace(
        orbit,
        samples=picked.copy(),
        stride=orbit.stride * stride,
        transient=orbit.transient + offset * orbit.stride,
    )


def detect_cycle(orbit: Orbit, max_period: int = 64, tolerance: float = 1e-8) -> CycleReport:
    """Smallest period ``p <= max_period`` repeating over the last ``2*max_period`` samples."""
    if orbit.stride != 1:
        raise ValidationError("cycle detection needs a stride-1 orbit")
    if max_period < 1:
        raise ValidationError("max_period must be >= 1")
    if orbit.n < 2 * max_period:
        raise InsufficientSamples(
            f"need {2 * max_period} samples for max_period={max_period}, have {orbit.n}"
        )
    tail = orbit.samples[-2 * max_period:]
    for p in range(1, max_period + 1):
        gap = np.abs(tail[p:] - tail[:-p]).max()
        if gap <= tolerance:
            return CycleReport(True, p, tail[-p:].copy(), tolerance)
    return CycleReport(False, None, None, tolerance)


def orbit_chunks(
    model: MapModel,
    params: np.ndarray,
    x0: np.ndarray,
    n: int,
    transient: int = DEFAULT_TRANSIENT,
    chunk: int = 2048,
) -> Iterator[np.ndarray]:
    """Iterate many independent orbits in lockstep.

    ``params`` has shape ``(K, p)`` and ``x0`` shape ``(K, m)``. Yields
    arrays of shape ``(K, L, m)`` with consecutive post-transient states,
    ``n`` states in total per orbit. Arithmetic is elementwise IEEE, so each
    row matches :func:`generate_orbit` bit for bit.
    """
    params = np.asarray(params, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    p = tuple(params[:, j] for j in range(model.param_dim))
    s = tuple(x0[:, j].copy() for j in range(model.state_dim))
    step = model.step

    def check(state, it):
        bad = ~(np.abs(np.stack(state)) <= DIVERGENCE_BOUND)
        if bad.any():
            raise Diverged(it)

    for it in range(transient):
        s = step(p, s)
    check(s, transient)
    done = 0
    it = transient
    while done < n:
        m = min(chunk, n - done)
        buf = np.empty((len(x0), m, model.state_dim))
        for k in range(m):
            if done + k > 0:
                s = step(p, s)
                it += 1
            for j in range(model.state_dim):
                buf[:, k, j] = s[j]
        check(s, it)
        done += m
        yield buf

