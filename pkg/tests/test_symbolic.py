import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chaosleak.errors import InconsistentItinerary, NotOneDimensional, ValidationError
from chaosleak.maps import HENON, LOGISTIC, SKEW_TENT
from chaosleak.orbit import generate_orbit
from chaosleak.regimes import lyapunov_1d
from chaosleak.symbolic import (
    MIN_WIDTH,
    Itinerary,
    Order,
    encode_itinerary,
    estimate_mu,
    estimate_x0,
    itinerary_of,
    unimodal_compare,
)


def symbols_of(mu, x0, n):
    return encode_itinerary(generate_orbit(LOGISTIC, mu, x0, n, transient=0))


def chaotic_trials(count, seed):
    rng = np.random.default_rng(seed)
    while count:
        mu, x0 = rng.uniform(3.7, 4.0), rng.uniform(0.0, 1.0)
        if lyapunov_1d(LOGISTIC, mu, 0.3, n=20_000) > 0:
            count -= 1
            yield mu, x0


def test_encode_examples():
    assert str(encode_itinerary([0.0, 0.0, 0.0], critical_point=0.5)) == "000"
    it = encode_itinerary([0.2, 0.7, 0.5], critical_point=0.5)
    assert str(it) == "011" and it.tie_events == (2,)
    orb = generate_orbit(LOGISTIC, 4.0, 0.3, 3, transient=0)
    assert orb.samples[:, 0] == pytest.approx([0.3, 0.84, 0.5376])
    assert str(encode_itinerary(orb)) == "011"


def test_encode_uses_map_turning_point():
    orb = generate_orbit(SKEW_TENT, 0.3, 0.25, 5, transient=0)
    it = encode_itinerary(orb)
    assert it.critical_point == 0.3
    assert it.symbols.tolist() == (orb.samples[:, 0] >= 0.3).astype(int).tolist()
    with pytest.raises(NotOneDimensional):
        encode_itinerary(generate_orbit(HENON, (1.4, 0.3), (0, 0), 5))


def test_itinerary_string_round_trip():
    it = Itinerary.from_string("0110\n")
    assert str(it) == "0110"
    with pytest.raises(ValidationError):
        Itinerary.from_string("012")


def test_compare_examples():
    assert unimodal_compare("00", "01") is Order.LESS
    assert unimodal_compare("10", "11") is Order.GREATER
    assert unimodal_compare("0110", "0110") is Order.EQUAL
    assert unimodal_compare("011", "0110111") is Order.EQUAL


symbol_strings = st.text(alphabet="01", min_size=12, max_size=12)


@settings(max_examples=100, deadline=None)
@given(symbol_strings, symbol_strings, symbol_strings)
def test_compare_is_total_preorder(a, b, c):
    ab, ba = unimodal_compare(a, b), unimodal_compare(b, a)
    assert ab == -ba
    if ab <= 0 and unimodal_compare(b, c) <= 0:
        assert unimodal_compare(a, c) <= 0


def test_itinerary_order_monotone_in_x(rng):
    for x, y in np.sort(rng.uniform(0.0, 0.5, (200, 2)), axis=1):
        sx, sy = itinerary_of(LOGISTIC, 4.0, x, 30), itinerary_of(LOGISTIC, 4.0, y, 30)
        assert unimodal_compare(sx, sy) is not Order.GREATER


def test_estimate_x0_examples():
    res = estimate_x0("0" * 20, LOGISTIC, 4.0)
    assert res.contains(0.0)
    res = estimate_x0(symbols_of(4.0, 0.3, 40), LOGISTIC, 4.0)
    assert abs(res.midpoint - 0.3) < 1e-6 and res.contains(0.3)
    assert res.width >= MIN_WIDTH


def test_estimate_x0_rejects_wrong_parameter():
    it = symbols_of(3.9, 0.55, 60)
    try:
        res = estimate_x0(it, LOGISTIC, 3.6)
    except InconsistentItinerary:
        return
    assert not res.consistent


def test_estimate_x0_round_trip_and_shrinking_width():
    for mu, x0 in chaotic_trials(100, 2024):
        it = symbols_of(mu, x0, 40)
        short = estimate_x0(Itinerary(it.symbols[:20], 0.5), LOGISTIC, mu)
        full = estimate_x0(it, LOGISTIC, mu)
        assert full.contains(x0)
        assert full.width <= short.width


def test_estimate_mu_known_x0():
    res = estimate_mu(symbols_of(3.97, 0.3, 60), LOGISTIC, x0=0.3)
    assert res.contains(3.97) and res.width < 1e-5 and res.consistent


def test_estimate_mu_uninformative():
    res = estimate_mu("0" * 30, LOGISTIC, x0=0.0)
    assert res.interval == (0.0, 4.0)
    assert res.consistent and res.diagnostics["note"] == "uninformative itinerary"


def test_estimate_mu_never_excludes_truth():
    for mu, x0 in chaotic_trials(100, 99):
        assert estimate_mu(symbols_of(mu, x0, 60), LOGISTIC, x0=x0).contains(mu)


def test_estimate_mu_rejects_impossible_sequence():
    # staying right of 1/2 for 30 steps needs an attracting fixed point there,
    # which no parameter in [3.7, 4] has
    with pytest.raises(InconsistentItinerary):
        estimate_mu("01" + "1" * 30, LOGISTIC, x0=0.3, mu_range=(3.7, 4.0))


def test_joint_estimate_is_admissibility_threshold():
    it = symbols_of(3.9, 0.55, 80)
    res = estimate_mu(it, LOGISTIC, grid_step=1e-4)
    # lower bound: every parameter reproducing the symbols lies at or above it
    assert res.midpoint <= 3.9 + 1e-4
    assert res.consistent
    witness = res.diagnostics["x0_witness"]
    assert str(itinerary_of(LOGISTIC, res.midpoint, witness, 80)) == str(it)


@pytest.mark.xfail(strict=True, reason="joint estimate sits at the admissibility threshold, "
                   "about 5e-3 below the generating parameter for this sequence")
def test_joint_estimate_within_grid_tolerance():
    res = estimate_mu(symbols_of(3.9, 0.55, 80), LOGISTIC, grid_step=1e-4)
    assert abs(res.midpoint - 3.9) < 1e-3
