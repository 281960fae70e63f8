import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chaosleak.errors import AllPairsDegenerate, BinningMismatch, TooFewSamples
from chaosleak.estimate import (
    build_histogram,
    chaotic_band_grid,
    consecutive_pair_invert,
    return_map_estimate,
    wootters_distance,
    wootters_estimate,
)
from chaosleak.maps import LOGISTIC
from chaosleak.orbit import generate_orbit


def padded(pairs, n=100):
    """A series of at least ``n`` samples whose only large value is where we put it."""
    base = np.full(n, 0.1)
    for k, v in pairs:
        base[k] = v
    return base


def test_return_map_apex_pair():
    x = padded([(10, 0.5), (11, 0.975)])
    rep = return_map_estimate(x)
    assert rep.value == pytest.approx(3.9, abs=1e-15)
    assert rep.diagnostics["bound"] == "lower"


def test_return_map_simulated():
    orb = generate_orbit(LOGISTIC, 3.9, 0.2, 10**4)
    assert 3.899 <= return_map_estimate(orb).value <= 3.900


def test_return_map_degenerate_and_short():
    rep = return_map_estimate(np.full(200, 0.64))
    assert rep.diagnostics["warning"] == "degenerate return map"
    with pytest.raises(TooFewSamples):
        return_map_estimate(np.full(50, 0.3))


def test_return_map_refine_close_to_truth():
    rep = return_map_estimate(generate_orbit(LOGISTIC, 3.95, 0.2, 10**4), refine=True)
    assert rep.method == "return-map-parabola"
    assert rep.value == pytest.approx(3.95, abs=5e-3)


def test_return_map_improves_with_length():
    rng = np.random.default_rng(3)
    err = {1000: [], 100_000: []}
    for _ in range(20):
        mu, x0 = rng.uniform(3.7, 4.0), rng.uniform(0.05, 0.95)
        orb = generate_orbit(LOGISTIC, mu, x0, 100_000)
        for n in err:
            err[n].append(abs(return_map_estimate(orb.samples[:n, 0]).value - mu))
    assert np.mean(err[100_000]) < np.mean(err[1000])


def test_pair_inversion_examples():
    assert consecutive_pair_invert([0.5, 0.9736798]).value == pytest.approx(3.8947192, abs=1e-12)
    assert consecutive_pair_invert([0.5, 1.0]).value == 4.0
    with pytest.raises(AllPairsDegenerate):
        consecutive_pair_invert([0.0, 0.0, 0.0])


def test_pair_inversion_recovers_chaotic_parameters():
    rng = np.random.default_rng(11)
    errors = []
    for _ in range(100):
        mu, x0 = rng.uniform(3.57, 4.0), rng.uniform(0.05, 0.95)
        orb = generate_orbit(LOGISTIC, mu, x0, 200)
        errors.append(abs(consecutive_pair_invert(orb).value - mu))
    assert np.median(errors) < 1e-12


def test_histogram_examples():
    assert build_histogram([0.1, 0.9], bins=2).probabilities == pytest.approx([0.5, 0.5])
    assert build_histogram([0.5], bins=2).probabilities == pytest.approx([0.0, 1.0])
    assert build_histogram([1.0], bins=4).counts.tolist() == [0, 0, 0, 1]
    clamped = build_histogram([-0.5, 2.0], bins=2)
    assert clamped.counts.tolist() == [1, 1] and clamped.clamped == 2


def test_logistic_invariant_density_is_u_shaped():
    orb = generate_orbit(LOGISTIC, 4.0, 0.3, 10**5)
    counts = build_histogram(orb.samples[:, 0]).counts
    assert counts[0] > 3 * counts[50] and counts[-1] > 3 * counts[50]


def test_wootters_examples():
    p = np.array([0.2, 0.3, 0.5])
    assert wootters_distance(p, p) == 0.0
    assert wootters_distance([1.0, 0.0], [0.0, 1.0]) == pytest.approx(math.pi / 2)
    assert wootters_distance([0.5, 0.5], [1.0, 0.0]) == pytest.approx(math.pi / 4)
    with pytest.raises(BinningMismatch):
        wootters_distance(build_histogram([0.2], bins=4), build_histogram([0.2], bins=5))


def _dists(n):
    return st.lists(st.floats(0, 1), min_size=n, max_size=n).filter(lambda v: sum(v) > 1e-3).map(
        lambda v: np.array(v) / sum(v)
    )


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 12).flatmap(lambda n: st.tuples(_dists(n), _dists(n))))
def test_wootters_axioms(pq):
    p, q = pq
    d = wootters_distance(p, q)
    assert d == wootters_distance(q, p)
    assert 0.0 <= d <= math.pi / 2
    assert wootters_distance(p, p) <= 1e-12


def test_chaotic_band_grid():
    g = chaotic_band_grid()
    assert g[0] == 3.57 and g[-1] == pytest.approx(4.0) and len(g) == 431


def test_wootters_estimate_single_candidate():
    leak = generate_orbit(LOGISTIC, 3.9, 0.2, 2000)
    rep = wootters_estimate(leak, candidate_grid=[3.8], ref_length=1000, seeds=1)
    assert rep.value == 3.8


def test_wootters_self_consistency_and_permutation_invariance():
    grid = np.round(np.arange(3.80, 3.96, 0.01), 10)
    leak = generate_orbit(LOGISTIC, 3.88, 0.4, 20_000).samples[:, 0]
    rep = wootters_estimate(leak, candidate_grid=grid, ref_length=20_000, seeds=2)
    curve = dict(rep.objective_curve)
    truth = curve[grid[8]]
    assert all(curve[g] > truth for g in grid if abs(g - 3.88) >= 0.03 - 1e-9)
    shuffled = np.random.default_rng(0).permutation(leak)
    rep2 = wootters_estimate(shuffled, candidate_grid=grid, ref_length=20_000, seeds=2)
    assert rep2.objective_curve == rep.objective_curve


@pytest.mark.slow
def test_wootters_estimate_long_leak():
    leak = generate_orbit(LOGISTIC, 3.8947192, 0.99842379, 10**5)
    rep = wootters_estimate(leak)
    assert abs(rep.value - 3.8947192) <= 1e-3
