"""Chaotic map models and the registry of built-in maps.

A map is data (its phase-space and parameter domains) plus two plain
functions: the update rule ``step(params, state)`` and its Jacobian
``jac(params, state)``. Both take and return tuples of components so the same
function runs on Python floats in the scalar iteration loops and on numpy
arrays in the vectorised sweeps (one array element per parameter cell).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, ParamOutOfDomain, UnknownMap

__all__ = [
    "Box",
    "MapModel",
    "LOGISTIC",
    "HENON",
    "SKEW_TENT",
    "REGISTRY",
    "get_map",
    "iterate",
    "jacobian",
]


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[low_i, high_i]`` (or ``(low_i, high_i)`` if ``open``)."""

    low: tuple
    high: tuple
    open: bool = False

    @property
    def dim(self) -> int:
        return len(self.low)

    def contains(self, point: Sequence[float]) -> bool:
        if len(point) != self.dim:
            return False
        for v, lo, hi in zip(point, self.low, self.high):
            if not np.isfinite(v):
                return False
            if self.open:
                if not lo < v < hi:
                    return False
            elif not lo <= v <= hi:
                return False
        return True

    def project(self, axis: int) -> tuple[float, float]:
        return self.low[axis], self.high[axis]

    def sample(self, rng: np.random.Generator) -> tuple:
        """One uniform draw inside the box (open boxes never return an endpoint)."""
        while True:
            pt = tuple(float(rng.uniform(lo, hi)) for lo, hi in zip(self.low, self.high))
            if self.contains(pt):
                return pt

    def __str__(self) -> str:
        lb, rb = ("(", ")") if self.open else ("[", "]")
        return "x".join(f"{lb}{lo:g};{hi:g}{rb}" for lo, hi in zip(self.low, self.high))


@dataclass(frozen=True)
class MapModel:
    """A discrete-time map ``x_{k+1} = step(params, x_k)``.

    ``init_domain`` is the box random initial conditions are drawn from. It
    defaults to the phase domain; maps whose phase domain is mostly outside
    the basin of the attractor (Hénon) declare a smaller one.
    ``critical_point`` maps ``params`` to the turning point of a unimodal
    one-dimensional map and is ``None`` for every other map.
    """

    name: str
    state_dim: int
    param_dim: int
    phase_domain: Box
    param_domain: Box
    step: Callable = field(repr=False)
    jac: Callable = field(repr=False)
    init_domain: Optional[Box] = None
    critical_point: Optional[Callable] = field(default=None, repr=False)
    formula: str = ""

    @property
    def seed_domain(self) -> Box:
        return self.init_domain if self.init_domain is not None else self.phase_domain

    def check_params(self, params) -> tuple:
        params = _as_tuple(params)
        if len(params) != self.param_dim:
            raise DimensionMismatch(
                f"{self.name} takes {self.param_dim} parameter(s), got {len(params)}"
            )
        if not self.param_domain.contains(params):
            raise ParamOutOfDomain(
                f"{self.name} parameters {params} outside {self.param_domain}"
            )
        return params

    def check_state(self, state) -> tuple:
        state = _as_tuple(state)
        if len(state) != self.state_dim:
            raise DimensionMismatch(
                f"{self.name} state has dimension {self.state_dim}, got {len(state)}"
            )
        return state


def _as_tuple(v) -> tuple:
    if np.isscalar(v):
        return (float(v),)
    return tuple(float(c) for c in np.asarray(v, dtype=float).ravel())


# logistic: mu * (x * (1 - x)); grouping keeps the image inside [0, 1] under rounding
def _logistic_step(p, s):
    x = s[0]
    return (p[0] * (x * (1.0 - x)),)


def _logistic_jac(p, s):
    return ((p[0] * (1.0 - 2.0 * s[0]),),)


def _henon_step(p, s):
    a, b = p
    x, y = s
    return (1.0 + y - a * x * x, b * x)


def _henon_jac(p, s):
    a, b = p
    x = s[0]
    return ((-2.0 * a * x, 1.0), (b, 0.0))


def _skew_tent_step(p, s):
    c = p[0]
    x = s[0]
    if isinstance(x, np.ndarray) or isinstance(c, np.ndarray):
        return (np.where(x <= c, x / c, (1.0 - x) / (1.0 - c)),)
    return (x / c if x <= c else (1.0 - x) / (1.0 - c),)


def _skew_tent_jac(p, s):
    c = p[0]
    x = s[0]
    if isinstance(x, np.ndarray) or isinstance(c, np.ndarray):
        return ((np.where(x <= c, 1.0 / c, -1.0 / (1.0 - c)),),)
    return ((1.0 / c if x <= c else -1.0 / (1.0 - c),),)


LOGISTIC = MapModel(
    name="logistic",
    state_dim=1,
    param_dim=1,
    phase_domain=Box((0.0,), (1.0,)),
    param_domain=Box((0.0,), (4.0,)),
    step=_logistic_step,
    jac=_logistic_jac,
    critical_point=lambda p: 0.5,
    formula="x' = mu*x*(1-x)",
)

# Standard Hénon form; random initial conditions come from a box around the
# origin because most of [-4,4]^2 lies outside the attractor's basin.
HENON = MapModel(
    name="henon",
    state_dim=2,
    param_dim=2,
    phase_domain=Box((-4.0, -4.0), (4.0, 4.0)),
    param_domain=Box((0.0, -1.0), (2.0, 1.0)),
    step=_henon_step,
    jac=_henon_jac,
    init_domain=Box((-0.1, -0.1), (0.1, 0.1)),
    formula="x' = 1 + y - a*x^2, y' = b*x",
)

SKEW_TENT = MapModel(
    name="skew_tent",
    state_dim=1,
    param_dim=1,
    phase_domain=Box((0.0,), (1.0,)),
    param_domain=Box((0.0,), (1.0,), open=True),
    step=_skew_tent_step,
    jac=_skew_tent_jac,
    critical_point=lambda p: p[0],
    formula="x' = x/c if x <= c else (1-x)/(1-c)",
)

REGISTRY = {m.name: m for m in (LOGISTIC, HENON, SKEW_TENT)}


def get_map(name: str) -> MapModel:
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownMap(f"unknown map {name!r}; known: {', '.join(REGISTRY)}") from None


def iterate(model: MapModel, params, state) -> np.ndarray:
    """Apply the map once and return the new state as a float array."""
    p = model.check_params(params)
    s = model.check_state(state)
    return np.array(model.step(p, s), dtype=float)


def jacobian(model: MapModel, params, state) -> np.ndarray:
    """Analytic ``m x m`` Jacobian of the map at ``state``."""
    p = model.check_params(params)
    s = model.check_state(state)
    return np.array(model.jac(p, s), dtype=float)
