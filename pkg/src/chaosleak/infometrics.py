"""Entropy and complexity measures.

Shannon and Tsallis functionals, ordinal-pattern distributions
and permutation entropy, Haar wavelet details with a sliding-window
multiresolution entropy change detector, and Jensen-type statistical
complexity.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DOutOfRange,
    InvalidDistribution,
    LengthMismatch,
    QOutOfRange,
    SeriesTooShort,
    ValidationError,
)
from .maps import MapModel
from .orbit import DEFAULT_TRANSIENT, generate_orbit

__all__ = [
    "OrdinalDistribution",
    "MreSeries",
    "ComplexityPoint",
    "shannon_entropy",
    "tsallis_entropy",
    "entropy",
    "ordinal_patterns",
    "ordinal_distribution",
    "permutation_entropy",
    "haar_detail",
    "haar_decompose",
    "mre",
    "jensen_divergence",
    "statistical_complexity",
    "complexity_sweep",
]

DEFAULT_D = 5
DEFAULT_TAU = 1
DEFAULT_Q = 1.8
MRE_WINDOW = 64
MRE_SHIFT = 8
MRE_K = 5.0
MRE_WARMUP = 16
MAX_D = 7


def _check_dist(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InvalidDistribution("distribution must be a nonempty vector")
    if (p < 0).any() or not np.isfinite(p).all():
        raise InvalidDistribution("negative or non-finite probability")
    if abs(p.sum() - 1.0) > 1e-9:
        raise InvalidDistribution(f"probabilities sum to {p.sum()!r}")
    return p


def _shannon(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum()) + 0.0  # no negative zero


def _tsallis(p: np.ndarray, q: float) -> float:
    nz = p[p > 0]
    return float((1.0 - (nz ** q).sum()) / (q - 1.0))


def shannon_entropy(p, normalized: bool = False) -> float:
    """``-sum p ln p`` in nats (``0 ln 0 = 0``); ``normalized`` divides by ``ln N``."""
    p = _check_dist(p)
    s = _shannon(p)
    if normalized:
        return s / math.log(p.size) if p.size > 1 else 0.0
    return s


def tsallis_entropy(p, q: float) -> float:
    """``(1 - sum p^q) / (q - 1)`` for ``q > 0``, ``q != 1``."""
    p = _check_dist(p)
    if not q > 0:
        raise QOutOfRange("Tsallis index must be positive")
    if q == 1:
        raise QOutOfRange("q = 1 is the Shannon limit; use shannon_entropy")
    return _tsallis(p, q)


def entropy(p, q: float = 1.0) -> float:
    """Shannon entropy for ``q == 1``, Tsallis entropy otherwise."""
    return shannon_entropy(p) if q == 1 else tsallis_entropy(p, q)


def _max_entropy(n: int, q: float) -> float:
    if q == 1:
        return math.log(n)
    return (1.0 - n ** (1.0 - q)) / (q - 1.0)


# ---------------------------------------------------------------- ordinal

@dataclass(frozen=True)
class OrdinalDistribution:
    """Pattern probabilities indexed in lexicographic order of ``itertools.permutations``.

    Pattern ``(i_0, ..., i_{d-1})`` lists window positions by increasing
    value, so ``x[i_0] <= x[i_1] <= ...`` with ties ordered by position.
    """

    embed_dim: int
    delay: int
    counts: np.ndarray
    window_count: int

    @property
    def pattern_probs(self) -> np.ndarray:
        return self.counts / self.window_count

    @property
    def patterns(self) -> list:
        return list(itertools.permutations(range(self.embed_dim)))

    @property
    def forbidden(self) -> int:
        return int((self.counts == 0).sum())


def _lehmer_index(perms: np.ndarray) -> np.ndarray:
    """Lexicographic rank of each row permutation."""
    n, d = perms.shape
    idx = np.zeros(n, dtype=np.int64)
    for i in range(d):
        smaller_after = (perms[:, i + 1:] < perms[:, i:i + 1]).sum(axis=1)
        idx += smaller_after * math.factorial(d - 1 - i)
    return idx


def ordinal_patterns(series, d: int = DEFAULT_D, tau: int = DEFAULT_TAU) -> np.ndarray:
    """Lexicographic pattern index of every embedded vector."""
    x = np.asarray(series, dtype=float).ravel()
    if not 2 <= d <= MAX_D:
        raise DOutOfRange(f"embedding dimension must be in [2, {MAX_D}]")
    if tau < 1:
        raise ValidationError("delay must be >= 1")
    span = (d - 1) * tau + 1
    if x.size < span:
        raise SeriesTooShort(f"need at least {span} samples for d={d}, tau={tau}")
    windows = np.lib.stride_tricks.sliding_window_view(x, span)[:, ::tau]
    perms = np.argsort(windows, axis=1, kind="stable")
    return _lehmer_index(perms)


def ordinal_distribution(series, d: int = DEFAULT_D, tau: int = DEFAULT_TAU) -> OrdinalDistribution:
    idx = ordinal_patterns(series, d, tau)
    counts = np.bincount(idx, minlength=math.factorial(d))
    return OrdinalDistribution(d, tau, counts, int(idx.size))


def permutation_entropy(series, d: int = DEFAULT_D, tau: int = DEFAULT_TAU,
                        normalized: bool = True) -> float:
    """Shannon entropy of the ordinal distribution, optionally divided by ``ln d!``."""
    dist = ordinal_distribution(series, d, tau)
    s = _shannon(dist.pattern_probs)
    return s / math.log(math.factorial(d)) if normalized else s


# ------------------------------------------------------------------ Haar

def haar_decompose(series, levels: int):
    """Orthonormal Haar pyramid.

    Returns ``(details, approximation, dropped)`` where ``details[j-1]``
    holds the level-``j`` coefficients. Each level drops a trailing odd
    sample of the running approximation; ``dropped[j-1]`` is 1 when level
    ``j`` did.
    """
    a = np.asarray(series, dtype=float).ravel()
    if levels < 1:
        raise ValidationError("level must be >= 1")
    if a.size < 2 ** levels:
        raise SeriesTooShort(f"need at least {2 ** levels} samples for level {levels}")
    details, dropped = [], []
    r2 = math.sqrt(2.0)
    for _ in range(levels):
        dropped.append(a.size % 2)
        a = a[: a.size - a.size % 2]
        even, odd = a[0::2], a[1::2]
        details.append((even - odd) / r2)
        a = (even + odd) / r2
    return details, a, dropped


def haar_detail(series, level: int = 1) -> np.ndarray:
    """Level-``level`` Haar detail coefficients, ``(x_{2k} - x_{2k+1}) / sqrt 2`` at level 1."""
    return haar_decompose(series, level)[0][level - 1]


@dataclass(frozen=True)
class MreSeries:
    level: int
    window: int
    shift: int
    functional: str
    q: float
    starts: np.ndarray  # window start, in samples of the input series
    values: np.ndarray
    change_flags: np.ndarray
    zero_windows: np.ndarray
    k: float

    def rows(self):
        return zip(self.starts.tolist(), self.values.tolist(), self.change_flags.tolist())


def mre(
    series,
    level: int = 1,
    window: int = MRE_WINDOW,
    shift: int = MRE_SHIFT,
    functional: str = "tsallis",
    q: float = DEFAULT_Q,
    k: float = MRE_K,
    warmup: int = MRE_WARMUP,
) -> MreSeries:
    """Sliding-window entropy of level-``level`` Haar detail energy.

    Inside each window of ``window`` coefficients (shift ``shift``) the
    energies ``d_i^2 / sum d^2`` form a distribution whose Shannon or
    Tsallis(q) entropy is the window value; an all-zero window scores 0 and
    is marked in ``zero_windows``. After ``warmup`` windows, a window is
    flagged when it sits more than ``k`` median absolute deviations from the
    median of all earlier windows.
    """
    functional = functional.lower()
    if functional not in ("shannon", "tsallis"):
        raise ValidationError("functional must be 'shannon' or 'tsallis'")
    if functional == "tsallis" and (not q > 0 or q == 1):
        raise QOutOfRange("Tsallis index must be positive and != 1")
    if window < 2 or shift < 1:
        raise ValidationError("window must be >= 2 and shift >= 1")
    coeffs = haar_detail(series, level)
    if coeffs.size < window + shift:
        raise SeriesTooShort("series too short for two MRE windows")
    wins = np.lib.stride_tricks.sliding_window_view(coeffs, window)[::shift]
    energy = wins * wins
    total = energy.sum(axis=1)
    zero = total == 0.0
    p = energy / np.where(zero, 1.0, total)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        if functional == "shannon":
            terms = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
            vals = -terms.sum(axis=1)
        else:
            vals = (1.0 - (p ** q).sum(axis=1)) / (q - 1.0)
    vals = np.where(zero, 0.0, np.maximum(vals, 0.0))

    flags = np.zeros(len(vals), dtype=bool)
    for i in range(warmup, len(vals)):
        hist = vals[:i]
        med = np.median(hist)
        mad = np.median(np.abs(hist - med))
        if mad > 0 and abs(vals[i] - med) > k * mad:
            flags[i] = True
    starts = np.arange(len(vals)) * shift * 2 ** level
    return MreSeries(level, window, shift, functional, q if functional == "tsallis" else 1.0,
                     starts, vals, flags, zero, k)


# ------------------------------------------------------------ complexity

@dataclass(frozen=True)
class ComplexityPoint:
    H: float
    Q: float
    C: float
    q: float


def _jensen_raw(p: np.ndarray, r: np.ndarray, q: float) -> float:
    s = _shannon if q == 1 else (lambda v: _tsallis(v, q))
    return s(0.5 * (p + r)) - 0.5 * s(p) - 0.5 * s(r)


def jensen_divergence(p, r, q: float = 1.0) -> float:
    """Jensen divergence of the Shannon (``q == 1``) or Tsallis(q) entropy.

    The raw value is divided by its value for a delta against the uniform
    distribution of the same length, which is the largest a divergence from
    the uniform distribution can reach. Pairs further apart than that (e.g.
    two distinct deltas) saturate at 1.
    """
    p = _check_dist(p)
    r = _check_dist(r)
    if p.size != r.size:
        raise LengthMismatch("distributions have different lengths")
    if not q > 0:
        raise QOutOfRange("Tsallis index must be positive")
    n = p.size
    if n < 2:
        return 0.0
    delta = np.zeros(n)
    delta[0] = 1.0
    norm = _jensen_raw(delta, np.full(n, 1.0 / n), q)
    return float(min(max(_jensen_raw(p, r, q) / norm, 0.0), 1.0))


def _complexity_of(probs: np.ndarray, q: float) -> ComplexityPoint:
    n = probs.size
    s = _shannon(probs) if q == 1 else _tsallis(probs, q)
    h = min(max(s / _max_entropy(n, q), 0.0), 1.0)
    qd = jensen_divergence(probs, np.full(n, 1.0 / n), q)
    return ComplexityPoint(h, qd, h * qd, q)


def statistical_complexity(series, d: int = DEFAULT_D, tau: int = DEFAULT_TAU,
                           q: float = DEFAULT_Q) -> ComplexityPoint:
    """Normalised ordinal entropy ``H``, divergence to uniform ``Q`` and ``C = H * Q``.

    ``q == 1`` selects Shannon entropy with the Jensen-Shannon divergence;
    any other positive ``q`` uses the Tsallis functional for both factors.
    """
    if not q > 0:
        raise QOutOfRange("Tsallis index must be positive")
    dist = ordinal_distribution(series, d, tau)
    return _complexity_of(dist.pattern_probs, q)


def complexity_sweep(
    model: MapModel,
    grid: Sequence[float],
    d: int = DEFAULT_D,
    tau: int = DEFAULT_TAU,
    q: float = DEFAULT_Q,
    n: int = 100_000,
    transient: int = DEFAULT_TRANSIENT,
    seed: int = 42,
    component: int = 0,
    base_params: Optional[Sequence[float]] = None,
    param_index: int = 0,
) -> list:
    """``(param, ComplexityPoint)`` for one post-transient orbit per grid value.

    Initial conditions are uniform draws (one per grid value, in grid order)
    from ``numpy.random.default_rng(seed)``.
    """
    grid = np.asarray(grid, dtype=float)
    if model.param_dim > 1 and base_params is None:
        raise ValidationError("base_params is required for multi-parameter maps")
    base = list(base_params) if base_params is not None else [0.0] * model.param_dim
    plist = []
    for v in grid:
        p = list(base)
        p[param_index] = float(v)
        plist.append(model.check_params(p))
    rng = np.random.default_rng(seed)
    out = []
    for v, p in zip(grid, plist):
        x0 = model.seed_domain.sample(rng)
        orb = generate_orbit(model, p, x0, n, transient)
        out.append((float(v), statistical_complexity(orb.component(component), d, tau, q)))
    return out
