"""Detection of non-chaotic parameter regimes.

Bifurcation diagrams, Lyapunov exponents (scalar derivative average for 1-d
maps, QR re-orthonormalisation for the full spectrum) and the Chaotic /
Periodic / Unbounded classification of a two-parameter plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateJacobian, Diverged, ValidationError
from .maps import MapModel
from .orbit import DEFAULT_TRANSIENT, DIVERGENCE_BOUND, _out_of_bounds, generate_orbit

__all__ = [
    "LOG_ZERO",
    "DEFAULT_LAMBDA_MIN",
    "MIN_LYAPUNOV_STEPS",
    "Regime",
    "BifurcationDiagram",
    "RegimeGrid",
    "bifurcation_diagram",
    "distinct_values",
    "lyapunov_1d",
    "lyapunov_spectrum",
    "classify_regime",
    "classify_with_exponent",
    "regime_grid",
]

# ln(1e-300): stands in for ln(0) when an orbit hits a critical point
LOG_ZERO = math.log(1e-300)
DEFAULT_LAMBDA_MIN = 0.005
MIN_LYAPUNOV_STEPS = 10_000
DEGENERATE_FRACTION = 0.01


class Regime(str, Enum):
    CHAOTIC = "Chaotic"
    PERIODIC = "Periodic"
    UNBOUNDED = "Unbounded"

    def __str__(self) -> str:
        return self.value


PGM_LEVELS = {Regime.UNBOUNDED: 0, Regime.PERIODIC: 128, Regime.CHAOTIC: 255}


@dataclass(frozen=True)
class BifurcationDiagram:
    param_index: int
    grid: np.ndarray
    columns: tuple  # one array of plotted values per grid value
    diverged: np.ndarray
    transient: int
    plot_count: int
    component: int

    @property
    def points(self) -> np.ndarray:
        """All ``(param, value)`` pairs, column by column."""
        rows = [
            np.column_stack([np.full(len(col), mu), col])
            for mu, col in zip(self.grid, self.columns)
        ]
        return np.vstack(rows) if rows else np.empty((0, 2))


@dataclass(frozen=True)
class RegimeGrid:
    """Labels over an ``a x b`` parameter plane.

    ``labels[i, j]`` is the label string of cell ``(a_i, b_j)``.
    """

    a_grid: np.ndarray
    b_grid: np.ndarray
    labels: np.ndarray
    largest_le: np.ndarray
    lambda_min: float
    divergence_bound: float = DIVERGENCE_BOUND
    settings: dict = field(default_factory=dict)

    def rows(self):
        for i, a in enumerate(self.a_grid):
            for j, b in enumerate(self.b_grid):
                yield a, b, self.labels[i, j], self.largest_le[i, j]

    def to_pgm(self) -> bytes:
        """Binary P5 image: one pixel per cell, ``a`` increasing upwards, ``b`` rightwards."""
        lut = np.vectorize(lambda r: PGM_LEVELS[Regime(r)], otypes=[np.uint8])
        pix = lut(self.labels)[::-1, :]
        h, w = pix.shape
        return f"P5\n{w} {h}\n255\n".encode("ascii") + pix.tobytes()


def distinct_values(values: Sequence[float], tol: float = 1e-6) -> np.ndarray:
    """Cluster sorted values whose consecutive gaps are <= ``tol``; return one per cluster."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return v
    keep = np.concatenate([[True], np.diff(v) > tol])
    return v[keep]


def _draw_x0(model: MapModel, rng: np.random.Generator) -> tuple:
    return model.seed_domain.sample(rng)


def bifurcation_diagram(
    model: MapModel,
    grid: Sequence[float],
    param_index: int = 0,
    base_params=None,
    transient: int = DEFAULT_TRANSIENT,
    plot_count: int = 200,
    component: int = 0,
    seed: int = 42,
) -> BifurcationDiagram:
    """Asymptotic states against one swept parameter.

    Each column starts from its own uniform random ``x0`` (one draw per grid
    value from ``numpy.random.default_rng(seed)``), discards ``transient``
    iterations and records ``plot_count`` successive values of ``component``.
    Diverging columns come back empty with ``diverged`` set.
    """
    grid = np.asarray(grid, dtype=float)
    if plot_count < 1:
        raise ValidationError("plot_count must be >= 1")
    if not 0 <= param_index < model.param_dim:
        raise ValidationError(f"param_index must be in [0, {model.param_dim})")
    if not 0 <= component < model.state_dim:
        raise ValidationError(f"component must be in [0, {model.state_dim})")
    if model.param_dim > 1:
        if base_params is None:
            raise ValidationError("base_params is required for multi-parameter maps")
        base = list(model.check_params(base_params))
    else:
        base = [0.0]
    params_list = []
    for mu in grid:
        p = list(base)
        p[param_index] = float(mu)
        params_list.append(model.check_params(p))

    rng = np.random.default_rng(seed)
    columns, diverged = [], []
    for p in params_list:
        x0 = _draw_x0(model, rng)
        orb = generate_orbit(model, p, x0, plot_count, transient, allow_divergence=True)
        if orb.diverged:
            columns.append(np.empty(0))
            diverged.append(True)
        else:
            columns.append(orb.component(component).copy())
            diverged.append(False)
    return BifurcationDiagram(
        param_index, grid, tuple(columns), np.array(diverged, dtype=bool),
        transient, plot_count, component,
    )


def _check_steps(n: int) -> None:
    if n < MIN_LYAPUNOV_STEPS:
        raise ValidationError(f"n must be >= {MIN_LYAPUNOV_STEPS} for Lyapunov estimates")


def _burn_in(model: MapModel, p, s, transient: int):
    step = model.step
    for k in range(transient):
        s = step(p, s)
        if _out_of_bounds(s):
            raise Diverged(k + 1)
    return s


def lyapunov_1d(model: MapModel, params, x0, n: int = 10**6,
                transient: int = DEFAULT_TRANSIENT) -> float:
    """Average of ``ln|g'(x_k)|`` over ``n`` post-transient iterates of a 1-d map.

    A visited point with derivative exactly zero contributes :data:`LOG_ZERO`
    instead of ``-inf``.
    """
    if model.state_dim != 1:
        raise ValidationError("lyapunov_1d needs a one-dimensional map")
    _check_steps(n)
    p = model.check_params(params)
    s = model.check_state(x0)
    s = _burn_in(model, p, s, transient)
    step, jac, log = model.step, model.jac, math.log
    total = 0.0
    for k in range(n):
        d = abs(jac(p, s)[0][0])
        total += log(d) if d > 0.0 else LOG_ZERO
        s = step(p, s)
        if not abs(s[0]) <= DIVERGENCE_BOUND:
            raise Diverged(transient + k + 1)
    return total / n


def _replacement_column(q: list, j: int, m: int) -> list:
    # unit vector orthogonal to the first j frame columns
    best, best_norm = None, -1.0
    for t in range(m):
        v = [1.0 if i == t else 0.0 for i in range(m)]
        for i in range(j):
            c = sum(q[i][l] * v[l] for l in range(m))
            v = [v[l] - c * q[i][l] for l in range(m)]
        nv = math.sqrt(sum(c * c for c in v))
        if nv > best_norm:
            best, best_norm = v, nv
    return [c / best_norm for c in best]


def lyapunov_spectrum(model: MapModel, params, x0, n: int = 10**6,
                      transient: int = DEFAULT_TRANSIENT) -> np.ndarray:
    """All ``m`` Lyapunov exponents, descending.

    An orthonormal frame is pushed through the Jacobian every step and
    re-orthonormalised by modified Gram-Schmidt (a thin QR); exponent ``i``
    is the average of ``ln R_ii``. Zero diagonal entries are logged as
    :data:`LOG_ZERO`; if more than 1% of steps produce one the estimate is
    rejected with :class:`DegenerateJacobian`.
    """
    _check_steps(n)
    p = model.check_params(params)
    s = model.check_state(x0)
    s = _burn_in(model, p, s, transient)
    m = model.state_dim
    step, jac, log, sqrt = model.step, model.jac, math.log, math.sqrt
    q = [[1.0 if i == j else 0.0 for i in range(m)] for j in range(m)]
    sums = [0.0] * m
    zero_steps = 0
    for k in range(n):
        J = jac(p, s)
        vs = [[sum(J[i][l] * q[j][l] for l in range(m)) for i in range(m)] for j in range(m)]
        hit_zero = False
        for j in range(m):
            v = vs[j]
            for i in range(j):
                c = sum(q[i][l] * v[l] for l in range(m))
                v = [v[l] - c * q[i][l] for l in range(m)]
            r = sqrt(sum(c * c for c in v))
            if r > 0.0:
                sums[j] += log(r)
                q[j] = [c / r for c in v]
            else:
                hit_zero = True
                sums[j] += LOG_ZERO
                q[j] = _replacement_column(q, j, m)
        zero_steps += hit_zero
        s = step(p, s)
        if _out_of_bounds(s):
            raise Diverged(transient + k + 1)
    if zero_steps > DEGENERATE_FRACTION * n:
        raise DegenerateJacobian(
            f"zero stretching factor on {zero_steps} of {n} steps"
        )
    return np.sort(np.array(sums) / n)[::-1]


def classify_regime(
    model: MapModel,
    params,
    x0=None,
    seed: int = 42,
    n: int = MIN_LYAPUNOV_STEPS,
    transient: int = DEFAULT_TRANSIENT,
    lambda_min: float = DEFAULT_LAMBDA_MIN,
) -> Regime:
    """Unbounded if the orbit diverges, else Chaotic iff the largest exponent exceeds ``lambda_min``.

    ``x0`` defaults to a uniform draw from the model's seed domain.
    """
    return classify_with_exponent(model, params, x0, seed, n, transient, lambda_min)[0]


def classify_with_exponent(
    model: MapModel,
    params,
    x0=None,
    seed: int = 42,
    n: int = MIN_LYAPUNOV_STEPS,
    transient: int = DEFAULT_TRANSIENT,
    lambda_min: float = DEFAULT_LAMBDA_MIN,
) -> tuple[Regime, float]:
    """As :func:`classify_regime`, also returning the largest exponent (``nan`` if unbounded)."""
    p = model.check_params(params)
    if x0 is None:
        x0 = _draw_x0(model, np.random.default_rng(seed))
    try:
        spec = _spectrum_safe(model, p, x0, n, transient)
    except Diverged:
        return Regime.UNBOUNDED, float("nan")
    lam = float(spec[0])
    return (Regime.CHAOTIC if lam > lambda_min else Regime.PERIODIC), lam


def _spectrum_safe(model, p, x0, n, transient):
    # classification only needs the largest exponent; a collapsing minor
    # direction (e.g. Hénon with b=0) must not abort it
    try:
        return lyapunov_spectrum(model, p, x0, n, transient)
    except DegenerateJacobian:
        ex, _ = _spectrum_batch(model, np.array([p]), np.array([x0], dtype=float), n, transient)
        return ex[0]


def _spectrum_batch(model: MapModel, P: np.ndarray, X0: np.ndarray, n: int, transient: int):
    """Vectorised QR spectrum for ``K`` independent cells.

    Returns ``(exponents (K, m) descending, diverged (K,))``; exponents of
    diverged cells are ``nan``. Zero stretching factors use
    :data:`LOG_ZERO` without the degeneracy check.
    """
    K = len(P)
    m = model.state_dim
    p = tuple(P[:, j].astype(float) for j in range(model.param_dim))
    s = tuple(X0[:, j].astype(float).copy() for j in range(m))
    alive = np.ones(K, dtype=bool)
    step, jac = model.step, model.jac

    def advance(s, alive):
        s = step(p, s)
        bad = np.zeros(K, dtype=bool)
        for c in s:
            bad |= ~(np.abs(c) <= DIVERGENCE_BOUND)
        if bad.any():
            alive = alive & ~bad
            s = tuple(np.where(alive, c, 0.0) for c in s)
        return s, alive

    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(transient):
            s, alive = advance(s, alive)
        Q = np.broadcast_to(np.eye(m), (K, m, m)).copy()
        sums = np.zeros((K, m))
        Jm = np.empty((K, m, m))
        for _ in range(n):
            J = jac(p, s)
            for i in range(m):
                for l in range(m):
                    Jm[:, i, l] = J[i][l]
            V = Jm @ Q
            for j in range(m):
                v = V[:, :, j]
                for i in range(j):
                    qi = Q[:, :, i]
                    v = v - (qi * v).sum(axis=1, keepdims=True) * qi
                r = np.sqrt((v * v).sum(axis=1))
                zero = r == 0.0
                sums[:, j] += np.where(alive, np.where(zero, LOG_ZERO, np.log(np.where(zero, 1.0, r))), 0.0)
                Q[:, :, j] = v / np.where(zero, 1.0, r)[:, None]
                if zero.any():
                    for t in np.flatnonzero(zero):
                        Q[t, :, j] = _replacement_column([list(Q[t, :, i]) for i in range(m)], j, m)
            s, alive = advance(s, alive)
    ex = np.sort(sums / n, axis=1)[:, ::-1]
    ex[~alive] = np.nan
    return ex, ~alive


def regime_grid(
    model: MapModel,
    a_grid: Sequence[float],
    b_grid: Sequence[float],
    n: int = MIN_LYAPUNOV_STEPS,
    transient: int = DEFAULT_TRANSIENT,
    lambda_min: float = DEFAULT_LAMBDA_MIN,
    seed: int = 42,
) -> RegimeGrid:
    """Classify every ``(a, b)`` cell of a two-parameter map.

    Initial conditions are drawn row-major (``a`` outer, ``b`` inner), one per
    cell, from ``numpy.random.default_rng(seed)``. All cells are iterated
    together in one vectorised pass.
    """
    if model.param_dim != 2:
        raise ValidationError("regime_grid needs a two-parameter map")
    _check_steps(n)
    a_grid = np.asarray(a_grid, dtype=float)
    b_grid = np.asarray(b_grid, dtype=float)
    if a_grid.size == 0 or b_grid.size == 0:
        raise ValidationError("grids must be nonempty")
    cells = []
    for a in a_grid:
        for b in b_grid:
            cells.append(model.check_params((a, b)))
    rng = np.random.default_rng(seed)
    x0 = np.array([_draw_x0(model, rng) for _ in cells])
    ex, div = _spectrum_batch(model, np.array(cells), x0, n, transient)
    lam = ex[:, 0]
    labels = np.where(div, Regime.UNBOUNDED.value,
                      np.where(lam > lambda_min, Regime.CHAOTIC.value, Regime.PERIODIC.value))
    shape = (a_grid.size, b_grid.size)
    return RegimeGrid(
        a_grid, b_grid, labels.reshape(shape).astype(object), lam.reshape(shape), lambda_min,
        settings={"n": n, "transient": transient, "seed": seed},
    )
