"""Control-parameter recovery from leaked orbits.

Three attacks on one-dimensional orbits:

* return-map apex: the logistic return map peaks at ``mu/4``, so the largest
  leaked value bounds ``mu`` from below;
* algebraic inversion of consecutive pairs, ``mu = x_{k+1} / (x_k (1 - x_k))``;
* histogram matching: the leaked histogram is compared with reference
  histograms over a candidate grid under Wootters' distance
  ``arccos(sum_i sqrt(p_i q_i))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    AllPairsDegenerate,
    BinningMismatch,
    EmptyInput,
    NotOneDimensional,
    TooFewSamples,
    ValidationError,
)
from .maps import LOGISTIC, MapModel
from .orbit import DEFAULT_TRANSIENT, Orbit, orbit_chunks

__all__ = [
    "Histogram",
    "EstimationReport",
    "return_map_estimate",
    "consecutive_pair_invert",
    "build_histogram",
    "wootters_distance",
    "wootters_estimate",
    "chaotic_band_grid",
]

RETURN_MAP_MIN_SAMPLES = 100
APEX_WINDOW = 0.05


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    clamped: int = 0  # samples outside the range folded into the end bins

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    @property
    def bins(self) -> int:
        return len(self.counts)


@dataclass
class EstimationReport:
    estimate: np.ndarray
    method: str
    objective_curve: list  # (candidate, score) pairs
    samples_used: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return float(self.estimate[0])


def _series(data) -> np.ndarray:
    if isinstance(data, Orbit):
        if data.samples.shape[1] != 1:
            raise NotOneDimensional("attack needs a one-dimensional orbit")
        if data.stride != 1:
            raise ValidationError("attack needs a stride-1 orbit")
        return data.samples[:, 0]
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise NotOneDimensional("attack needs a one-dimensional series")
    return arr


def return_map_estimate(orbit, refine: bool = False) -> EstimationReport:
    """Estimate the logistic parameter as four times the return-map maximum.

    The max rule gives a lower bound on the true parameter. With ``refine``
    a parabola ``y = c0 + c1 x + c2 x^2`` is least-squares fitted to the
    return-map pairs whose abscissa lies within 0.05 of the apex, and its
    vertex height replaces the raw maximum.
    """
    x = _series(orbit)
    if len(x) < RETURN_MAP_MIN_SAMPLES:
        raise TooFewSamples(f"need at least {RETURN_MAP_MIN_SAMPLES} samples, have {len(x)}")
    xk, xk1 = x[:-1], x[1:]
    top = int(np.argmax(xk1))
    apex = float(xk1[top])
    diag = {"apex_pair": (float(xk[top]), apex), "bound": "lower"}
    if np.ptp(x) == 0.0:
        diag["warning"] = "degenerate return map"
    est = 4.0 * apex
    method = "return-map-max"
    if refine:
        near = np.abs(xk - xk[top]) <= APEX_WINDOW
        if near.sum() >= 3 and np.ptp(xk[near]) > 0:
            c2, c1, c0 = np.polyfit(xk[near], xk1[near], 2)
            if c2 < 0:
                vertex = c0 - c1 * c1 / (4.0 * c2)
                est = 4.0 * vertex
                method = "return-map-parabola"
                diag["fit_points"] = int(near.sum())
                diag["bound"] = "none (fitted)"
        if method != "return-map-parabola":
            diag["refine"] = "skipped: not enough spread near the apex"
    return EstimationReport(np.array([est]), method, [], len(x), diag)


def consecutive_pair_invert(orbit) -> EstimationReport:
    """Invert ``x_{k+1} = mu x_k (1 - x_k)`` for every usable pair; report the median."""
    x = _series(orbit)
    if len(x) < 2:
        raise TooFewSamples("need at least 2 samples")
    xk, xk1 = x[:-1], x[1:]
    ok = (xk != 0.0) & (xk != 1.0)
    if not ok.any():
        raise AllPairsDegenerate("every pair starts at 0 or 1")
    mus = xk1[ok] / (xk[ok] * (1.0 - xk[ok]))
    curve = list(zip(xk[ok].tolist(), mus.tolist()))
    diag = {"pairs_used": int(ok.sum()), "pairs_skipped": int((~ok).sum())}
    return EstimationReport(np.array([float(np.median(mus))]), "pair-inversion", curve, len(x), diag)


def _bin_index(x: np.ndarray, lo: float, hi: float, bins: int):
    idx = np.floor((x - lo) / (hi - lo) * bins).astype(np.int64)
    outside = int(((x < lo) | (x > hi)).sum())
    return np.clip(idx, 0, bins - 1), outside


def build_histogram(values, bins: int = 100, value_range: tuple = (0.0, 1.0)) -> Histogram:
    """Equal-width histogram; bins are half-open except the last, which is closed."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise EmptyInput("no values to bin")
    if bins < 2:
        raise ValidationError("need at least 2 bins")
    lo, hi = map(float, value_range)
    if not hi > lo:
        raise ValidationError("empty histogram range")
    idx, outside = _bin_index(x, lo, hi, bins)
    counts = np.bincount(idx, minlength=bins)
    return Histogram(np.linspace(lo, hi, bins + 1), counts, outside)


def _hellinger_angle(h):
    # arccos(1 - h^2 / 2) == 2 asin(h / 2), without the cancellation near h = 0
    return 2.0 * np.arcsin(np.minimum(h / 2.0, math.sqrt(0.5)))


def wootters_distance(p, q) -> float:
    """``arccos`` of the Bhattacharyya coefficient, in ``[0, pi/2]``.

    For normalized ``p`` and ``q``, ``sum sqrt(p q) = 1 - h^2 / 2`` with
    ``h = ||sqrt(p) - sqrt(q)||``; the angle is evaluated from ``h`` so that
    equal distributions give exactly 0 and nearby ones keep full precision.
    """
    if isinstance(p, Histogram) and isinstance(q, Histogram):
        if p.bins != q.bins or not np.array_equal(p.bin_edges, q.bin_edges):
            raise BinningMismatch("histograms use different bins")
        p, q = p.probabilities, q.probabilities
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise BinningMismatch("distributions have different lengths")
    h = math.sqrt(float(((np.sqrt(p) - np.sqrt(q)) ** 2).sum()))
    return float(_hellinger_angle(h))


def chaotic_band_grid(step: float = 1e-3, lo: float = 3.57, hi: float = 4.0) -> np.ndarray:
    """Candidate grid ``lo, lo+step, ..., hi`` (endpoint included when it lands on the grid)."""
    count = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(count)


def wootters_estimate(
    leaked,
    candidate_grid: Sequence[float] | None = None,
    bins: int = 100,
    ref_length: int = 100_000,
    seeds: int = 4,
    model: MapModel = LOGISTIC,
    transient: int = DEFAULT_TRANSIENT,
    seed: int = 42,
    value_range: tuple | None = None,
) -> EstimationReport:
    """Pick the candidate whose reference histogram is closest to the leaked one.

    For every candidate parameter, ``seeds`` reference orbits of
    ``ref_length`` post-transient samples are generated from uniform random
    initial conditions (``numpy.random.default_rng(seed)``, candidate-major
    order) and their histograms averaged. Ties go to the smallest candidate.
    """
    x = _series(leaked)
    if model.state_dim != 1 or model.param_dim != 1:
        raise NotOneDimensional("histogram matching needs a one-parameter 1-d map")
    grid = chaotic_band_grid() if candidate_grid is None else np.asarray(candidate_grid, dtype=float)
    if grid.size == 0:
        raise ValidationError("empty candidate grid")
    for mu in grid:
        model.check_params((mu,))
    if seeds < 1 or ref_length < 1:
        raise ValidationError("seeds and ref_length must be >= 1")
    if value_range is None:
        value_range = model.phase_domain.project(0)
    lo, hi = value_range
    leaked_hist = build_histogram(x, bins, value_range)

    rng = np.random.default_rng(seed)
    K = grid.size * seeds
    params = np.repeat(grid, seeds)[:, None]
    x0 = np.array([model.seed_domain.sample(rng) for _ in range(K)])
    counts = np.zeros(K * bins, dtype=np.int64)
    offsets = (np.arange(K) * bins)[:, None]
    for chunk in orbit_chunks(model, params, x0, ref_length, transient):
        idx, _ = _bin_index(chunk[:, :, 0], lo, hi, bins)
        counts += np.bincount((idx + offsets).ravel(), minlength=K * bins)
    probs = counts.reshape(grid.size, seeds, bins) / ref_length
    ref = probs.mean(axis=1)

    diff = np.sqrt(ref) - np.sqrt(leaked_hist.probabilities)[None, :]
    dist = _hellinger_angle(np.sqrt((diff * diff).sum(axis=1)))
    best = float(dist.min())
    ties = np.flatnonzero(dist == best)
    pick = ties[np.argmin(grid[ties])]
    diag = {"ties": int(len(ties)), "bins": bins, "ref_length": ref_length, "seeds": seeds,
            "min_distance": best}
    if leaked_hist.clamped:
        diag["clamped_samples"] = leaked_hist.clamped
    return EstimationReport(
        np.array([grid[pick]]), "wootters", list(zip(grid.tolist(), dist.tolist())), len(x), diag
    )
