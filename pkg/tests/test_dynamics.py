import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bakerlab import ConstructionParams, GOLDEN
from bakerlab.dynamics import (DOUBLY, HYPERBOLIC, INCONCLUSIVE, SIMPLY, EscapePolicy,
                               boundary_distances, check_growth_inequality,
                               count_strip_crossings, default_policy, default_seeds,
                               escape_times, estimate_boundary_distance, hyperbolic_step_bounds,
                               is_member, iterate, koenig_classify, orbit_with_distances,
                               sample_w0, siegel_scan, _escape_times_numpy)
from bakerlab.maps import as_map, eval_fatou, eval_h1, named_map, sample_interpolation_zone

DOUBLE = as_map(lambda z: 2 * z, "double")
UPPER = EscapePolicy("imag", 50.0, 3)


def test_fatou_orbit_points():
    o = iterate(named_map("fatou"), 10, 5, stop_on_escape=False)
    ref = [10.0]
    for _ in range(5):
        ref.append(ref[-1] + 1 + math.exp(-ref[-1]))
    assert np.allclose(o.points.real, ref, rtol=0, atol=1e-12)
    assert np.allclose(o.steps, 1, atol=1e-4)
    assert np.all(np.diff(o.steps) < 0)


def test_identity_orbit():
    o = iterate(as_map(lambda z: z, "id"), 2 + 3j, 10)
    assert np.all(o.points == 2 + 3j) and o.terminated == "max_iter"


def test_h1_im_growth(p1):
    o = iterate(named_map("h1", p1), -10 + 3j * math.pi, 8, stop_on_escape=False)
    assert np.all(np.diff(o.points.imag) > 2 * math.pi)


def test_policy_validation_and_defaults():
    with pytest.raises(ValueError):
        EscapePolicy("sideways")
    assert default_policy("fatou").direction == "real"
    assert default_policy("h1").direction == "imag"
    assert default_policy("h2").direction == "-real"
    assert default_policy("g1").direction == "modulus"


@pytest.mark.parametrize("name", ["fatou", "h1", "h2", "F"])
def test_compiled_escape_matches_numpy(name, rng):
    m = named_map(name)
    z = rng.uniform(-15, 15, 400) + 1j * rng.uniform(-15, 15, 400)
    compiled = escape_times(m, z, 100)
    plain = _escape_times_numpy(m, z, 100, default_policy(m))
    assert np.array_equal(compiled, plain)
    # a bare callable cannot tell the direction of an overflow
    bare = escape_times(as_map(m.raw, m.name), z, 100, default_policy(m))
    agree = bare == compiled
    assert np.all(agree | (bare == -2))
    assert np.array_equal(escape_times(m, z, 100, parallel=False), compiled)


def test_escape_codes(p1):
    f = named_map("fatou")
    codes = escape_times(f, np.array([20 + 0j, -800 + math.pi * 1j, -800 + 0j]), 200)
    assert codes[0] > 0
    # e^{-z} overflows toward -infinity: no verdict
    assert codes[1] == -2
    # overflow along the escape direction counts as escape
    assert codes[2] == 1
    assert escape_times(as_map(lambda z: 0 * z, "zero"), np.array([5 + 0j]), 50)[0] == -1


def test_orbit_csv_columns():
    o = orbit_with_distances(named_map("fatou"), 5 + 0.5j, 10)
    text = o.to_csv()
    assert text.splitlines()[0] == "n,re,im,step,dist,ratio"
    assert len(text.splitlines()) == len(o.points) + 1


def test_step_bounds_values():
    lo, hi = hyperbolic_step_bounds([0.5, 2.0])
    assert lo[0] == pytest.approx(0.5 * math.log(1.5), abs=1e-15)
    assert hi[0] == pytest.approx(math.log(3), abs=1e-15)
    assert math.isinf(hi[1])


@pytest.mark.parametrize("y", [1.0, 2.0, 0.3])
def test_boundary_distance_half_plane_double(y):
    d = estimate_boundary_distance(DOUBLE, 1j * y, UPPER, r_max=10.0)
    assert abs(d - y) <= (2 / 32) * y


def test_boundary_distance_nonmember_is_zero():
    assert estimate_boundary_distance(DOUBLE, -1j, UPPER, r_max=10.0) == 0.0


def test_fatou_distance_grows_with_re():
    f = named_map("fatou")
    d = boundary_distances(f, np.array([10 + 0j, 20 + 0j, 40 + 0j]), r_max=np.array([50.0, 70, 110]))
    assert d[0] > 9 and np.all(np.diff(d) > 0)
    # the Baker domain contains the right half-plane
    assert np.all(d >= np.array([10, 20, 40]) - 1e-3)


def test_growth_admissible_and_small_L(p1):
    g = check_growth_inequality(p1, 20000)
    assert g.ok and g.failures == 0 and g.worst_margin > 0.5
    bad = check_growth_inequality(p1.with_(L=0.5), 20000)
    assert not bad.ok and bad.failures > 0


def test_growth_margin_monotone_in_L(p1):
    ms = [check_growth_inequality(p1.with_(L=float(2 ** i)), 5000).worst_margin for i in range(11)]
    assert all(b >= a for a, b in zip(ms, ms[1:]))


def test_growth_theorem2(p2):
    g = check_growth_inequality(p2, 20000)
    assert g.ok and set(g.margins) == {"re_absorbed"}


def test_crossings(p1):
    F = named_map("F", p1)
    rng = np.random.default_rng(3)
    for z in sample_interpolation_zone(p1, 100, rng, edge_fraction=0.0):
        assert count_strip_crossings(iterate(F, z, 300, stop_on_escape=False), p1) == 1
    for z in sample_w0(p1, 100, rng):
        assert count_strip_crossings(iterate(F, z, 300, stop_on_escape=False), p1) == 0
    assert count_strip_crossings(iterate(F, -20 + 120j, 50, stop_on_escape=False), p1) == 0


def test_imhn_invariant(p1, rng):
    c = 2 * math.pi * (p1.alpha + p1.m)
    z = p1.x0 - 40 * rng.random(1000) + 1j * rng.uniform(-50, 50, 1000)
    w = eval_h1(z, p1)
    assert np.all(w.imag >= c + z.imag - 1)
    assert np.all(w.real < 0)


def test_escape_monotonicity_under_F(p1, rng):
    F = named_map("F", p1)
    c = 2 * math.pi * (p1.alpha + p1.m)
    seeds = np.concatenate([sample_interpolation_zone(p1, 50, rng), sample_w0(p1, 50, rng)])
    for s in seeds:
        pts = iterate(F, s, 40, stop_on_escape=False).points
        for a, b in zip(pts[:-1], pts[1:]):
            if a.imag > 3 * math.pi and a.real < p1.x0:
                assert b.imag > a.imag + c - 1


def test_ratio_interval_consistency():
    o = orbit_with_distances(named_map("fatou"), 10 + 0.5j, 40)
    ok = np.isfinite(o.ratios)
    t, lo, hi = o.ratios[ok], o.hyp_lo[ok], o.hyp_hi[ok]
    assert np.all(lo <= hi)
    assert np.all(lo <= 4 * t) and np.all(t <= 4 * hi)


def test_classify_fatou():
    v = koenig_classify("fatou")
    assert v.verdict == DOUBLY
    assert max(v.evidence["tail_max"]) < 0.05
    assert len(v.tail_ratios) == len(v.seeds) == 8


def test_classify_h1(p1):
    v = koenig_classify(named_map("h1", p1))
    assert v.verdict == SIMPLY
    assert min(v.evidence["tail_min"]) > 0.05
    assert v.evidence["depth_slope"] <= -0.5
    # deeper seeds have smaller ratios (the infimum over seeds is 0)
    assert v.evidence["tail_min"][-1] < v.evidence["tail_min"][0] / 10


def test_classify_h2():
    v = koenig_classify("h2")
    assert v.verdict == HYPERBOLIC
    assert v.evidence["beta"] >= 0.05


def test_classify_short_orbit_is_inconclusive():
    assert koenig_classify("fatou", [5 + 0.5j], n_max=6).verdict == INCONCLUSIVE


def test_verdict_json_roundtrip():
    import json
    v = koenig_classify("h2", default_seeds("h2")[:3])
    d = json.loads(v.to_json())
    assert d["verdict"] == v.verdict and len(d["seeds"]) == 3


def test_siegel_scan_golden(p1):
    s = siegel_scan(p1)
    assert s.r0 > 0 and s.stable
    assert 0.3 < s.r0 < 0.4


def test_siegel_scan_parabolic_multiplier(p1):
    s = siegel_scan(p1.with_(alpha=0.0))
    assert not s.stable and s.r0 == 0.0


def test_siegel_fixed_point(p1):
    o = iterate(named_map("g1", p1), 0j, 100)
    assert np.all(o.points == 0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-40, -1.5), st.floats(-30, 30))
def test_h1_left_half_plane_never_moves_right(x, y):
    p = ConstructionParams.theorem1()
    w = eval_h1(complex(x, y), p)
    assert w.real <= x + math.exp(x)
    assert w.imag >= y + 2 * math.pi * (p.alpha + p.m) - math.exp(x)


def test_is_member_upper_half_plane():
    z = np.array([1j, 0.01j, -1j, 3 - 0.5j])
    assert is_member(DOUBLE, z, UPPER).tolist() == [True, True, False, False]
