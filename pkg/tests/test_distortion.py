import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import ellipk as sp_ellipk

from bakerlab.distortion import (EllipticCache, M_K, M_K_array, agm, ellipk, groetzsch_mu,
                                 groetzsch_mu_inverse, phi_K, phi_K_pair, qc_schwarz_pick_check,
                                 stretch, stretch_samples, verify_MK_properties)
from bakerlab.hypmetric import rho_halfplane


def phi2_closed(r):
    return 2 * math.sqrt(r) / (1 + r)


def test_agm_known_value():
    # Gauss's constant 1 / AGM(1, sqrt 2)
    assert agm(1.0, math.sqrt(2))[0] == pytest.approx(1.19814023473559220744, rel=1e-15)


def test_ellipk_against_scipy(rng):
    for k in rng.random(200) * 0.999:
        assert ellipk(k) == pytest.approx(float(sp_ellipk(k * k)), rel=1e-13)


def test_ellipk_series_small_modulus(rng):
    for k in rng.random(50) * 0.1:
        total, term = 0.0, 1.0
        for n in range(30):
            if n:
                term *= ((2 * n - 1) / (2 * n)) ** 2 * k * k
            total += term
        assert ellipk(k) == pytest.approx(0.5 * math.pi * total, rel=1e-12)


def test_mu_symmetry_point_and_functional_equation(rng):
    assert groetzsch_mu(1 / math.sqrt(2)) == pytest.approx(math.pi / 2, abs=1e-15)
    for r in rng.uniform(1e-6, 1 - 1e-6, 50):
        rp = math.sqrt(1 - r * r)
        assert groetzsch_mu(r) * groetzsch_mu(rp) == pytest.approx(math.pi ** 2 / 4, rel=1e-13)


def test_mu_decreasing_and_endpoints():
    r = np.linspace(1e-9, 1 - 1e-9, 1000)
    mu = np.array([groetzsch_mu(x) for x in r])
    assert np.all(np.diff(mu) < 0)
    assert groetzsch_mu(1e-10) == pytest.approx(math.log(4e10), rel=1e-12)


def test_mu_inverse_roundtrip(rng):
    for r in rng.uniform(1e-6, 1 - 1e-6, 100):
        assert groetzsch_mu_inverse(groetzsch_mu(r)) == pytest.approx(r, rel=1e-12)


def test_phi_identities(rng):
    r = rng.random(1000)
    assert all(phi_K(1.0, x) == pytest.approx(x, abs=1e-14) for x in r[:100])
    assert phi_K(2.0, 0.25) == pytest.approx(0.8, abs=1e-14)
    for x in r[:100]:
        assert abs(phi_K(2.0, x) - phi2_closed(x)) < 1e-10
    K = 1 + 9 * rng.random(1000)
    assert all(phi_K(k, x) >= x - 1e-15 for k, x in zip(K, r))


def test_phi_inverse_composition(rng):
    r = rng.random(500)
    for K in (2.0, 3.0, 10.0):
        err = max(abs(phi_K_pair(1 / K, *phi_K_pair(K, x))[0] - x) for x in r)
        assert err < 1e-9
    # plain doubles suffice while phi_K(r) stays away from 1
    assert max(abs(phi_K(0.5, phi_K(2.0, x)) - x) for x in r) < 1e-9


def test_M_K_values():
    for x in (0.0, 0.5, 1.0, 5.0):
        assert M_K(1.0, x) == pytest.approx(x, abs=1e-14)
    assert M_K(3.0, 0.0) == 0
    ref = 2 * math.atanh(phi2_closed(math.tanh(0.5)))
    assert M_K(2.0, 1.0) == pytest.approx(ref, rel=1e-13)


def test_M_1_grid():
    x = np.linspace(0, 20, 100)
    assert np.max(np.abs(M_K_array(1.0, x) - x)) < 1e-12


def test_M_K_properties_K2():
    rep = verify_MK_properties(2.0)
    assert rep.ok and rep.points == 2000
    assert rep.increasing and rep.concave and rep.vuorinen


@pytest.mark.parametrize("K", [1.0, 1.5, 3.0, 10.0])
def test_M_K_properties_other_K(K):
    assert verify_MK_properties(K).ok


def test_M_K_linear_growth():
    x = np.linspace(10, 40, 7)
    d = M_K_array(10.0, x) - 10 * x
    # M_K(x) - Kx approaches K log 4 from below
    assert np.all(d < 10 * math.log(4)) and np.ptp(d) < 1e-6


def test_composition_monotone():
    x = np.linspace(0.1, 5, 50)
    inner = M_K_array(2.0, x)
    outer = M_K_array(2.0, inner)
    assert np.all(np.diff(outer) > 0)
    assert np.all(M_K_array(3.0, inner) >= outer)


def test_qc_schwarz_pick(rng):
    x = rng.uniform(0, 5, 50)
    assert qc_schwarz_pick_check(1.0, zip(x, x))
    assert qc_schwarz_pick_check(2.0, stretch_samples(2.0, 500, rng))
    # a conformal automorphism is an isometry
    z1 = rng.uniform(-3, 3, 100) + 1j * rng.uniform(0.1, 3, 100)
    z2 = rng.uniform(-3, 3, 100) + 1j * rng.uniform(0.1, 3, 100)
    auto = lambda z: (2 * z + 1) / (z + 1)   # noqa: E731  det 1, real coefficients
    pairs = zip(rho_halfplane(z1, z2, "upper"), rho_halfplane(auto(z1), auto(z2), "upper"))
    assert qc_schwarz_pick_check(3.0, pairs)
    assert stretch(2.0)(1 + 1j) == 2 + 1j


def test_qc_schwarz_pick_detects_violation():
    assert not qc_schwarz_pick_check(1.0, [(1.0, 1.5)])


def test_cache_thread_safety():
    cache = EllipticCache()
    ks = np.linspace(0.01, 0.99, 300)
    out = {}

    def work(tid):
        out[tid] = [cache.K(k) for k in ks]

    ts = [threading.Thread(target=work, args=(i,)) for i in range(8)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert all(out[i] == out[0] for i in out)
    assert len(cache) == len(ks)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        phi_K(0.0, 0.5)
    with pytest.raises(ValueError):
        M_K(2.0, -1.0)
    with pytest.raises(ValueError):
        groetzsch_mu(1.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(1.0, 20.0), st.floats(0.0, 30.0), st.floats(0.0, 30.0))
def test_M_K_monotone_and_vuorinen(K, a, b):
    lo, hi = min(a, b), max(a, b)
    assert M_K(K, lo) <= M_K(K, hi) + 1e-12
    assert M_K(K, hi) <= K * (hi + math.log(4)) + 1e-9
    assert M_K(K, hi) >= hi - 1e-9
