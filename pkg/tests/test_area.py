import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kochforge.area import (A0, TauSeries, area_series, closed_forms, residual_bound,
                            shoelace_check, spec_area_report, tau_of_spec, triangle_area)
from kochforge.choices import SnowflakeSpec
from kochforge.curves import snowflake_polyline
from kochforge.ifs import KochParams, build_family
from oracles import mp_closed_forms, shoelace_loop


@pytest.mark.parametrize("p", ["1/3", "0.3", "7/24", "0.26"])
def test_closed_forms_match_high_precision(p):
    params = KochParams.parse(p)
    lo, hi = mp_closed_forms(params.rational)
    x, y = closed_forms(params)
    assert x == pytest.approx(float(lo), abs=1e-15)
    assert y == pytest.approx(float(hi), abs=1e-15)
    assert x < A0 < y


def test_closed_forms_at_one_third():
    x, y = closed_forms("1/3")
    assert x == pytest.approx(math.sqrt(3) / 10, abs=1e-15)
    assert y == pytest.approx(2 * math.sqrt(3) / 5, abs=1e-15)


def test_hexagram_area():
    rep = area_series(TauSeries(1 / 3, (3,)), 1)
    assert rep.a[1] == pytest.approx(math.sqrt(3) / 3, abs=1e-15)


def test_tau_series_caps():
    with pytest.raises(ValueError):
        TauSeries(0.3, (4,))
    with pytest.raises(ValueError):
        TauSeries(0.3, (3, -1))


def test_triangle_area_depth_zero():
    p = 0.3
    # bump on a unit edge: base 1 - 2p, height sqrt(4p - 1) / 2
    assert triangle_area(p, 0) == pytest.approx(0.5 * (1 - 2 * p) * math.sqrt(4 * p - 1) / 2)


@pytest.mark.parametrize("p", ["1/3", "0.3", "0.26"])
@pytest.mark.parametrize("seed", range(4))
def test_recursion_matches_plain_shoelace(p, seed):
    params = KochParams.parse(p)
    fam = build_family(params)
    spec = SnowflakeSpec.random(params, 4, seed)
    rep = area_series(tau_of_spec(spec))
    for k in range(5):
        pts = snowflake_polyline(fam, spec, k).vertices.tolist()
        assert rep.a[k] == pytest.approx(shoelace_loop(pts), abs=1e-12)


def test_shoelace_check_tuple():
    spec = SnowflakeSpec.uniform(KochParams.parse("0.3"), 3, 1)
    rec, shoe, diff = shoelace_check(spec, 3)
    assert diff == abs(rec - shoe) and diff < 1e-12


@pytest.mark.parametrize("bit", [0, 1])
def test_uniform_specs_converge_within_tail(bit):
    params = KochParams.parse("1/3")
    rep = spec_area_report(SnowflakeSpec.uniform(params, 10, bit))
    target = rep.y_p if bit == 0 else rep.x_p
    # uniform tails attain the bound exactly; allow float rounding only
    assert abs(rep.a[10] - target) <= residual_bound(params.p, 10) + 4 * math.ulp(rep.a[10])
    assert rep.limit_estimate == pytest.approx(target, abs=1e-12)


def test_residual_bound_matches_direct_sum():
    p = 0.3
    direct = math.fsum(3 * 4 ** k * triangle_area(p, k) for k in range(7, 400))
    assert residual_bound(p, 7) == pytest.approx(direct, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([0.26, 0.3, 1 / 3]), st.integers(0, 2 ** 31))
def test_envelopes_shrink_and_contain_limit(p, seed):
    rng = np.random.default_rng(seed)
    taus = TauSeries(p, tuple(int(rng.integers(0, 3 * 4 ** k + 1)) for k in range(8)))
    rep = area_series(taus)
    widths = [hi - lo for lo, hi in zip(rep.a_lower, rep.a_upper)]
    for w0, w1 in zip(widths, widths[1:]):
        assert w1 / w0 == pytest.approx(4 * p * p, rel=1e-9)
    for lo, hi in zip(rep.a_lower, rep.a_upper):
        assert lo - 1e-12 <= rep.limit_estimate <= hi + 1e-12
    assert rep.x_p - 1e-12 <= rep.limit_estimate <= rep.y_p + 1e-12
    # partial envelopes are nested
    for k in range(len(rep.a) - 1):
        assert rep.a_lower[k] - 1e-12 <= rep.a_lower[k + 1]
        assert rep.a_upper[k + 1] <= rep.a_upper[k] + 1e-12


def test_area_monotone_in_taus():
    base = area_series(TauSeries(0.3, (1, 5, 20)))
    more = area_series(TauSeries(0.3, (1, 6, 20)))
    assert more.a[3] > base.a[3]


def test_fill_modes():
    taus = TauSeries(0.3, (2, 7, 30))
    R = residual_bound(0.3, 3)
    a3 = area_series(taus, fill=None).a[3]
    assert area_series(taus, fill=None).limit_estimate == pytest.approx(a3)
    assert area_series(taus, fill="zero").limit_estimate == pytest.approx(a3 + R)
    assert area_series(taus, fill="one").limit_estimate == pytest.approx(a3 - R, abs=1e-14)
    with pytest.raises(ValueError):
        area_series(taus, fill="half")
    with pytest.raises(ValueError):
        area_series(taus, K=4)


def test_csv_layout():
    text = area_series(TauSeries(1 / 3, (3, 12)), 2).to_csv()
    lines = text.splitlines()
    assert lines[0] == "k,tau_k,a_k,a_k_minus,a_k_plus"
    assert len(lines) == 4
    assert lines[1].startswith("0,3,") and lines[3].startswith("2,,")
    assert float(lines[2].split(",")[2]) == pytest.approx(math.sqrt(3) / 3)


def test_closed_forms_at_point_three():
    x, y = closed_forms("0.3")
    assert (round(x, 7), round(y, 7)) == (0.2233813, 0.6426441)
    assert x + y == pytest.approx(math.sqrt(3) / 2, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(0, 5))
def test_single_tau_increment_is_linear(seed, k):
    p = 0.3
    rng = np.random.default_rng(seed)
    base = [int(rng.integers(0, 3 * 4 ** j)) for j in range(6)]
    bumped = list(base)
    bumped[k] += 1
    gain = area_series(TauSeries(p, tuple(bumped))).limit_estimate - \
        area_series(TauSeries(p, tuple(base))).limit_estimate
    assert gain == pytest.approx(2 * triangle_area(p, k), rel=1e-9, abs=1e-15)


def test_tau_examples():
    params = KochParams.parse("1/3")
    assert tau_of_spec(SnowflakeSpec.uniform(params, 3, 0)).taus == (3, 12, 48)
    assert tau_of_spec(SnowflakeSpec.uniform(params, 3, 1)).taus == (0, 0, 0)


def test_injectivity_flag():
    p3, p03 = KochParams.parse("1/3"), KochParams.parse("0.3")
    assert spec_area_report(SnowflakeSpec.uniform(p3, 4, 1)).injectivity == "self_touching"
    assert spec_area_report(SnowflakeSpec.uniform(p3, 4, 0)).injectivity == "jordan_quasicircle"
    assert spec_area_report(SnowflakeSpec.random(p03, 3, 0)).to_dict()["injectivity"] == "jordan_quasicircle"
