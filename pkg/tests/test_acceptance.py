"""Acceptance criteria, each at its stated tolerance. The terminal summary
prints one PASS/FAIL line per criterion."""
import hashlib
import json
import math
import pathlib
import time

import numpy as np
import pytest

from bakerlab import GOLDEN
from bakerlab.distortion import M_K, phi_K, verify_MK_properties
from bakerlab.dynamics import (DOUBLY, HYPERBOLIC, SIMPLY, check_growth_inequality,
                               count_strip_crossings, iterate, koenig_classify,
                               orbit_with_distances, sample_w0)
from bakerlab.hypmetric import w_triple_ladder
from bakerlab.maps import named_map, region_of, RegionTag, sample_interpolation_zone
from bakerlab.qrcheck import search_admissible_params, verify_interpolation_bounds
from bakerlab.render import standard_render
from bakerlab.univalence import collision_search, critical_points_k1, landau_bound_check

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def searched():
    t = time.perf_counter()
    p = search_admissible_params("theorem1")
    return p, time.perf_counter() - t


def test_1_quasiregularity_bounds(searched, acceptance):
    p, t_search = searched
    t = time.perf_counter()
    rep = verify_interpolation_bounds(p, grid_density=400)
    elapsed = t_search + time.perf_counter() - t
    ok = (rep.max_abs_pz <= 0.25 and rep.max_abs_pzbar <= 0.25 and rep.max_K <= 2
          and rep.grid["overflow_points"] == 0 and elapsed < 30)
    acceptance(1, ok, f"x1={p.x1} L={p.L} |F_z-1|={rep.max_abs_pz:.4f} "
                      f"|F_zbar|={rep.max_abs_pzbar:.4f} K={rep.max_K:.4f} t={elapsed:.1f}s")
    assert ok


def test_2_growth_inequality(p1, acceptance):
    g = check_growth_inequality(p1, 100000, seed=0)
    ok = g.ok and g.margins["im_growth"] > 0 and g.margins["re_below_x0"] > 0
    acceptance(2, ok, f"samples={g.samples} min margins {g.margins}")
    assert ok


def test_3_crossings(p1, acceptance):
    rng = np.random.default_rng(2024)
    F = named_map("F", p1)
    seeds = np.concatenate([sample_interpolation_zone(p1, 250, rng), sample_w0(p1, 250, rng)])
    counts = [count_strip_crossings(iterate(F, z, 300, stop_on_escape=False), p1) for z in seeds]
    bad = sum(c > 1 for c in counts)
    acceptance(3, bad == 0, f"orbits={len(seeds)} violations={bad}")
    assert bad == 0


def test_4_classification_suite(p1, acceptance):
    t = time.perf_counter()
    got = {}
    populated = True
    for name, params, want in (("fatou", None, DOUBLY), ("h1", p1, SIMPLY),
                               ("h2", None, HYPERBOLIC)):
        assert p1.alpha == GOLDEN and p1.m == 3
        m = named_map(name, params) if params is not None else named_map(name)
        v = koenig_classify(m)
        got[name] = v.verdict
        ev = v.evidence
        populated &= all(len(ev[k]) == len(v.seeds) for k in ("tail_min", "tail_max"))
        populated &= len(v.tail_ratios) == len(v.seeds) > 0
        populated &= v.verdict == want
    elapsed = time.perf_counter() - t
    ok = populated and elapsed < 120
    acceptance(4, ok, f"{got} t={elapsed:.1f}s")
    assert ok


def test_5_fatou_ratio_decay(acceptance):
    o = orbit_with_distances(named_map("fatou"), 5 + 0j, 201)
    r = float(o.ratios[200])
    acceptance(5, r < 0.05, f"ratio[200]={r:.4g}")
    assert r < 0.05


def test_6_metric_skeleton(p1, acceptance):
    reps = w_triple_ladder(p1, [100.0, 200.0, 400.0])
    want = 2 * math.atanh(reps[0].r1 / reps[0].r2)
    in_disk = all(r.in_disk for r in reps)
    upper = all(abs(r.upper23 - want) <= 1e-12 for r in reps)
    y1 = reps[0].y1
    incr = all(b.lower12 - a.lower12 >= 0.8 * (b.x - a.x) / (math.pi - y1)
               for a, b in zip(reps, reps[1:]))
    ok = in_disk and upper and incr
    acceptance(6, ok, f"upper23={want:.12f} lower12={[round(r.lower12, 4) for r in reps]}")
    assert ok


def test_7_distortion(acceptance):
    xs = np.linspace(0.01, 20, 100)
    m1 = max(abs(M_K(1.0, float(x)) - x) for x in xs)
    rs = np.linspace(0.005, 0.995, 100)
    p2 = max(abs(phi_K(2.0, float(r)) - 2 * math.sqrt(r) / (1 + r)) for r in rs)
    props = [verify_MK_properties(K) for K in (1.0, 1.5, 2.0, 4.0, 10.0)]
    ok = m1 <= 1e-12 and p2 <= 1e-10 and all(r.ok for r in props)
    acceptance(7, ok, f"M_1 err={m1:.2e} phi_2 err={p2:.2e} "
                      f"props={[r.ok for r in props]}")
    assert ok


def test_8_landau(searched, acceptance):
    p, _ = searched
    x = 2 * p.L + 10
    rep = landau_bound_check(p, [x])
    row = rep.rows[0]
    ok = row.value_bound and row.derivative_vs_half
    acceptance(8, ok, f"L={p.L} x={x} |k|={row.abs_k:.6g} <= {row.two_x}, "
                      f"log|k'|={row.log_abs_dk:.6g} >= {row.half_x}")
    assert ok


def test_9_non_univalence(p1, acceptance):
    reps = collision_search(named_map("h1", p1), [1j * math.pi])
    good = [r for r in reps if r.residual < 1e-9 and r.separation > 1e-3]
    crit = critical_points_k1(p1)
    k1 = named_map("k1", p1)
    roots = []
    for z in crit:
        dz, _ = k1.wirtinger(np.array([z]))
        if abs(dz[0]) < 1e-10 and region_of(z, p1) is RegionTag.T:
            roots.append(z)
    ok = len(good) >= 1 and len(roots) >= 3
    acceptance(9, ok, f"collisions={len(good)} critical points in T={len(roots)}")
    assert ok


def test_10_render_goldens(acceptance):
    sums = json.loads((DATA / "goldens.json").read_text())
    same = True
    for name in ("fatou", "h1", "h2"):
        serial = standard_render(name, 64, parallel=False).ppm_bytes()
        parallel = standard_render(name, 64, parallel=True).ppm_bytes()
        stored = (DATA / f"{name}_64.ppm").read_bytes()
        same &= serial == parallel == stored
        same &= hashlib.sha256(serial).hexdigest() == sums[name]
    times = {}
    for name in ("fatou", "h1", "h2"):
        t = time.perf_counter()
        standard_render(name, 1024)
        times[name] = round(time.perf_counter() - t, 2)
    ok = same and max(times.values()) < 10
    acceptance(10, ok, f"goldens identical={same} 1024^2 seconds={times}")
    assert ok
