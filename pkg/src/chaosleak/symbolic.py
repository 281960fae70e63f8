"""Symbolic dynamics of unimodal maps.

Orbits are coded by which side of the turning point each state falls on
(0 left, 1 right or exactly on it). Itineraries are ordered by the unimodal
order, under which the itinerary of ``x`` is nondecreasing in ``x`` for a
fixed parameter. That monotonicity drives the initial-condition search; the
parameter searches use matched-prefix lengths because the itinerary of a
fixed ``x0`` is not monotone in the parameter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional, Sequence

import numpy as np

from .errors import (
    InconsistentItinerary,
    NoConsistentParameter,
    NotOneDimensional,
    ValidationError,
)
from .maps import MapModel, get_map
from .orbit import Orbit

__all__ = [
    "Order",
    "Itinerary",
    "SymbolicEstimate",
    "encode_itinerary",
    "itinerary_of",
    "unimodal_compare",
    "estimate_x0",
    "estimate_mu",
]

MIN_WIDTH = 1e-12
MIN_SYMBOLS_X0 = 8
MIN_SYMBOLS_MU = 16
JOINT_STEP = 1e-4
_MAX_BISECT = 1100  # enough to reach adjacent doubles anywhere in [0, 1]


class Order(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class Itinerary:
    symbols: np.ndarray
    critical_point: float
    tie_events: tuple = ()

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.symbols)

    @classmethod
    def from_string(cls, text: str, critical_point: float = 0.5) -> "Itinerary":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValidationError("symbol strings must be nonempty over {0,1}")
        return cls(np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0"), critical_point)


@dataclass
class SymbolicEstimate:
    interval: tuple
    midpoint: float
    symbols_used: int
    consistent: bool
    witness: Optional[float] = None  # a point whose itinerary reproduces the symbols
    diagnostics: dict = field(default_factory=dict)

    @property
    def width(self) -> float:
        return self.interval[1] - self.interval[0]

    def contains(self, value: float) -> bool:
        return self.interval[0] <= value <= self.interval[1]


def _as_symbols(symbols) -> np.ndarray:
    if isinstance(symbols, Itinerary):
        return np.asarray(symbols.symbols, dtype=np.uint8)
    if isinstance(symbols, str):
        return Itinerary.from_string(symbols).symbols
    s = np.asarray(symbols, dtype=np.uint8).ravel()
    if (s > 1).any():
        raise ValidationError("symbols must be 0 or 1")
    return s


def _unimodal(model: MapModel) -> None:
    if model.state_dim != 1 or model.critical_point is None:
        raise NotOneDimensional(f"{model.name} is not a unimodal one-dimensional map")


def encode_itinerary(orbit, model: Optional[MapModel] = None,
                     critical_point: Optional[float] = None) -> Itinerary:
    """Threshold each sample at the turning point; exact hits code as 1 and are logged."""
    if isinstance(orbit, Orbit):
        if orbit.samples.shape[1] != 1:
            raise NotOneDimensional("itineraries need a one-dimensional orbit")
        if orbit.stride != 1:
            raise ValidationError("itineraries need a stride-1 orbit")
        x = orbit.samples[:, 0]
        if critical_point is None:
            model = model or get_map(orbit.model_name)
            _unimodal(model)
            critical_point = float(model.critical_point(orbit.params))
    else:
        x = np.asarray(orbit, dtype=float)
        if x.ndim == 2 and x.shape[1] == 1:
            x = x[:, 0]
        if x.ndim != 1:
            raise NotOneDimensional("itineraries need a one-dimensional series")
        if critical_point is None:
            if model is None:
                raise ValidationError("need a model or a critical point for a raw series")
            raise ValidationError("raw series need an explicit critical point")
    ties = tuple(np.flatnonzero(x == critical_point).tolist())
    return Itinerary((x >= critical_point).astype(np.uint8), float(critical_point), ties)


def unimodal_compare(s1, s2) -> Order:
    """Unimodal order on the shared prefix of two symbol sequences.

    At the first differing index, 0 < 1 when an even number of 1s precedes
    it and 1 < 0 when that number is odd.
    """
    a, b = _as_symbols(s1), _as_symbols(s2)
    if a.size == 0 or b.size == 0:
        raise ValidationError("symbol sequences must be nonempty")
    parity = 0
    for u, v in zip(a.tolist(), b.tolist()):
        if u != v:
            less = (u < v) != bool(parity)
            return Order.LESS if less else Order.GREATER
        parity ^= u
    return Order.EQUAL


# ------------------------------------------------------------- vector core

def _symbols(model: MapModel, params: tuple, x: np.ndarray, L: int) -> np.ndarray:
    """``(K, L)`` itineraries for ``K`` starting points under (broadcast) ``params``."""
    c = model.critical_point(params)
    out = np.empty((x.size, L), dtype=np.uint8)
    state = (np.array(x, dtype=float),)
    for k in range(L):
        out[:, k] = state[0] >= c
        if k + 1 < L:
            state = model.step(params, state)
    return out


def _compare_rows(sym: np.ndarray, s: np.ndarray):
    """Unimodal order of each row against ``s`` and the matched-prefix lengths."""
    L = s.size
    diff = sym != s
    hit = diff.any(axis=1)
    first = np.where(hit, diff.argmax(axis=1), L)
    parity = np.concatenate([[0], np.cumsum(s) % 2])
    f = np.minimum(first, L - 1)
    u = sym[np.arange(len(sym)), f]
    less = (u < s[f]) != (parity[f] == 1)
    order = np.where(hit, np.where(less, -1, 1), 0)
    return order, first


def _order_at(model, params, s, x):
    return _compare_rows(_symbols(model, params, x, s.size), s)


def _x_search(model: MapModel, params: tuple, s: np.ndarray, lo: float, hi: float):
    """Bisection over ``x`` for every parameter cell in ``params``.

    Returns ``(found, witness, lo, hi, best)``: whether a point reproducing
    ``s`` was met, that point, the final bracket (``lo`` below ``s`` in the
    unimodal order, ``hi`` above), and the longest matched prefix seen.
    """
    K = np.broadcast(*params).size if params else 1
    lo = np.full(K, lo, dtype=float)
    hi = np.full(K, hi, dtype=float)
    found = np.zeros(K, dtype=bool)
    witness = np.full(K, np.nan)
    o_lo, m_lo = _order_at(model, params, s, lo)
    o_hi, m_hi = _order_at(model, params, s, hi)
    best = np.maximum(m_lo, m_hi)
    for o, pt in ((o_lo, lo), (o_hi, hi)):
        hit = (o == 0) & ~found
        witness[hit] = pt[hit]
        found |= hit
    # s outside the range spanned by the end points: no x can match
    active = ~found & (o_lo < 0) & (o_hi > 0)
    for _ in range(_MAX_BISECT):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        mid = 0.5 * (lo[idx] + hi[idx])
        stuck = (mid <= lo[idx]) | (mid >= hi[idx])
        sub = tuple(p[idx] if isinstance(p, np.ndarray) and p.ndim else p for p in params)
        o, m = _order_at(model, sub, s, mid)
        best[idx] = np.maximum(best[idx], m)
        o = np.where(stuck, 2, o)
        hit = o == 0
        witness[idx[hit]] = mid[hit]
        found[idx[hit]] = True
        lo[idx[o == -1]] = mid[o == -1]
        hi[idx[o == 1]] = mid[o == 1]
        active[idx[hit | stuck]] = False
    return found, witness, lo, hi, best


def _edge(pred, inside: float, outside: float, tol: float) -> float:
    """Bisect between a point satisfying ``pred`` and one that does not; return the outer end."""
    while abs(inside - outside) > tol:
        mid = 0.5 * (inside + outside)
        if mid == inside or mid == outside:
            break
        if pred(mid):
            inside = mid
        else:
            outside = mid
    return outside


def _pad(left: float, right: float, lo: float, hi: float) -> tuple:
    """Widen a bracket to at least ``MIN_WIDTH`` (double-precision floor), inside ``[lo, hi]``."""
    if right - left >= MIN_WIDTH:
        return left, right
    mid = 0.5 * (left + right)
    return max(lo, mid - 0.5 * MIN_WIDTH), min(hi, mid + 0.5 * MIN_WIDTH)


def itinerary_of(model: MapModel, params, x0: float, length: int) -> Itinerary:
    """Forward-simulated itinerary of ``x0`` (``length`` symbols)."""
    _unimodal(model)
    p = model.check_params(params)
    sym = _symbols(model, p, np.array([float(x0)]), length)[0]
    return Itinerary(sym, float(model.critical_point(p)))


# --------------------------------------------------------------- estimates

def estimate_x0(symbols, model: MapModel, params) -> SymbolicEstimate:
    """Bracket the initial conditions whose itinerary starts with ``symbols``.

    Bisection in the unimodal order finds one reproducing point; two more
    bisections push the bracket ends out to the edges of the cylinder of
    points sharing the observed prefix (never narrower than needed to cover
    it). Brackets are never reported narrower than ``MIN_WIDTH``.
    """
    _unimodal(model)
    p = model.check_params(params)
    s = _as_symbols(symbols)
    if s.size < MIN_SYMBOLS_X0:
        raise ValidationError(f"need at least {MIN_SYMBOLS_X0} symbols")
    u_lo, u_hi = model.phase_domain.project(0)
    found, witness, lo, hi, best = _x_search(model, p, s, u_lo, u_hi)
    if not found[0]:
        raise InconsistentItinerary(
            f"no initial condition reproduces the symbols (best matched prefix {int(best[0])}"
            f" of {s.size})"
        )
    xf = float(witness[0])

    def pred(x):
        return _order_at(model, p, s, np.array([x]))[0][0] == 0

    tol = 0.25 * MIN_WIDTH
    left = u_lo if pred(u_lo) else _edge(pred, xf, float(lo[0]) if lo[0] < xf else u_lo, tol)
    right = u_hi if pred(u_hi) else _edge(pred, xf, float(hi[0]) if hi[0] > xf else u_hi, tol)
    left, right = _pad(left, right, u_lo, u_hi)
    mid = 0.5 * (left + right)
    diag = {"parameter": p}
    if left == u_lo and right == u_hi:
        diag["note"] = "uninformative itinerary"
    return SymbolicEstimate((left, right), mid, int(s.size), True, xf, diag)


def estimate_mu(
    symbols,
    model: MapModel,
    x0: Optional[float] = None,
    mu_range: Optional[Sequence[float]] = None,
    grid_step: float = JOINT_STEP,
) -> SymbolicEstimate:
    """Bracket the control parameter behind an itinerary.

    With ``x0`` known, the set of parameters reproducing each successive
    prefix is tracked as a union of sampled intervals, and the ends of the
    final set are bisected to ``MIN_WIDTH``. The bracket is the hull of that
    set, so it never excludes a consistent parameter; when distinct
    parameter ranges share the itinerary the hull is wide and the pieces are
    listed under ``diagnostics["intervals"]``. Without ``x0``, each grid value (step ``grid_step``) is scored by
    the longest prefix that some initial condition reproduces in double
    precision; the best score wins, ties going to the smaller value, and a
    finer local grid around the winner refines it. Every parameter above the
    admissibility threshold of the symbols is mathematically consistent with
    them, so the joint estimate is weaker than the known-``x0`` one: it
    follows how deep a reproducing ``x0`` can still be resolved.
    """
    _unimodal(model)
    if model.param_dim != 1:
        raise ValidationError("parameter estimation from itineraries needs a one-parameter map")
    s = _as_symbols(symbols)
    if s.size < MIN_SYMBOLS_MU:
        raise ValidationError(f"need at least {MIN_SYMBOLS_MU} symbols")
    lo, hi = _mu_range(model, mu_range)
    if x0 is None:
        return _mu_joint(model, s, lo, hi, grid_step)
    x0 = float(x0)
    if not model.phase_domain.contains((x0,)):
        raise ValidationError(f"x0={x0} outside {model.phase_domain}")
    return _mu_known_x0(model, s, x0, lo, hi)


def _mu_range(model: MapModel, mu_range) -> tuple:
    d_lo, d_hi = model.param_domain.project(0)
    if model.param_domain.open:
        eps = 1e-9 * (d_hi - d_lo)
        d_lo, d_hi = d_lo + eps, d_hi - eps
    if mu_range is None:
        return d_lo, d_hi
    lo, hi = map(float, mu_range)
    if not (d_lo <= lo < hi <= d_hi):
        raise ValidationError(f"mu_range must lie inside {model.param_domain}")
    return lo, hi


def _matched_for_mu(model, s, x0, mus):
    _, m = _compare_rows(_symbols(model, (mus,), np.full(mus.size, x0), s.size), s)
    return m


def _mu_known_x0(model, s, x0, lo, hi, samples=33):
    # Track the parameter set reproducing each prefix as a union of intervals.
    # A kept interval spans from the sample before the first match to the
    # sample after the last one, so it is a superset of the matching set
    # (up to features narrower than the sampling step).
    L = s.size
    intervals = [(lo, hi)]
    for j in range(L):
        pts = np.concatenate([np.linspace(a, b, samples) for a, b in intervals])
        m = _matched_for_mu(model, s[: j + 1], x0, pts)
        ok = (m == j + 1).reshape(len(intervals), samples)
        kept = []
        for (a, b), row in zip(intervals, ok):
            if not row.any():
                continue
            grid = np.linspace(a, b, samples)
            hit = np.flatnonzero(row)
            runs = np.split(hit, np.flatnonzero(np.diff(hit) > 1) + 1)
            for run in runs:
                kept.append((grid[max(run[0] - 1, 0)], grid[min(run[-1] + 1, samples - 1)]))
        if not kept:
            raise InconsistentItinerary(
                f"no parameter reproduces the symbols from x0={x0} (longest prefix {j} of {L})"
            )
        kept.sort()
        merged = [list(kept[0])]
        for a, b in kept[1:]:
            if a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        intervals = [tuple(v) for v in merged]

    # final samples: exact matches inside the superset intervals
    pts = np.concatenate([np.linspace(a, b, samples) for a, b in intervals])
    m = _matched_for_mu(model, s, x0, pts)
    curve = list(zip(pts.tolist(), m.tolist()))
    ok = np.flatnonzero(m == L)
    if ok.size == 0:
        raise InconsistentItinerary(
            f"no parameter reproduces the symbols from x0={x0} (longest prefix {int(m.max())}"
            f" of {L})"
        )

    def pred(mu):
        return _matched_for_mu(model, s, x0, np.array([mu]))[0] == L

    tol = 0.25 * MIN_WIDTH
    first, last = pts[ok[0]], pts[ok[-1]]
    below, above = pts[pts < first], pts[pts > last]
    left = lo if first == lo else _edge(pred, first, below.max() if below.size else lo, tol)
    right = hi if last == hi else _edge(pred, last, above.min() if above.size else hi, tol)
    left, right = _pad(left, right, lo, hi)
    diag = {"x0": x0, "tracked_intervals": len(intervals),
            "intervals": [(float(a), float(b)) for a, b in intervals],
            "objective": "matched prefix length"}
    if left == lo and right == hi:
        diag["note"] = "uninformative itinerary"
    elif len(intervals) > 1:
        diag["note"] = "several disjoint consistent intervals; bracket is their hull"
    est = SymbolicEstimate((left, right), 0.5 * (left + right), L, True, float(pts[ok[0]]), diag)
    est.diagnostics["curve"] = curve
    return est


def _mu_joint(model, s, lo, hi, step, fine=50):
    L = s.size
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    grid = lo + step * np.arange(count)
    u_lo, u_hi = model.phase_domain.project(0)
    found, witness, _, _, best = _x_search(model, (grid,), s, u_lo, u_hi)
    curve = list(zip(grid.tolist(), best.tolist()))
    top = int(best.max())
    if top == 0:
        raise NoConsistentParameter("no grid parameter reproduces even the first symbol")
    i = int(np.flatnonzero(best == top)[0])
    # local refinement around the coarse winner, same (score, smaller mu) rule
    a, b = max(lo, grid[i] - step), min(hi, grid[i] + step)
    local = np.linspace(a, b, 2 * fine + 1)
    f2, w2, _, _, best2 = _x_search(model, (local,), s, u_lo, u_hi)
    top2 = int(best2.max())
    if top2 >= top:
        j = int(np.flatnonzero(best2 == top2)[0])
        mu, score, fnd, wit = float(local[j]), top2, bool(f2[j]), float(w2[j])
        cell = (b - a) / (2 * fine)
    else:
        mu, score, fnd, wit = float(grid[i]), top, bool(found[i]), float(witness[i])
        cell = step
    left, right = max(lo, mu - cell), min(hi, mu + cell)
    diag = {"grid_step": step, "grid_winner": float(grid[i]), "score": score,
            "objective": "longest prefix reproducible by some x0", "curve": curve}
    if not fnd:
        diag["note"] = "no parameter reproduced all symbols in double precision"
    else:
        diag["x0_witness"] = wit
    return SymbolicEstimate((left, right), mu, L, fnd, mu if fnd else None, diag)
