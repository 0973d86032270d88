"""Grötzsch modulus and Hersch-Pfluger distortion phi_K, with the
quasiconformal Schwarz-Pick majorant M_K built from them."""
from __future__ import annotations

import math
import threading
from dataclasses import asdict, dataclass
from typing import Iterable, Optional

import numpy as np

LOG4 = math.log(4.0)
HALF_PI = 0.5 * math.pi
QUARTER_PI2 = 0.25 * math.pi ** 2
SMALL = 1e-8


def agm(a: float, b: float, tol: float = 1e-15, max_iter: int = 40):
    """Arithmetic-geometric mean and the number of iterations used."""
    for n in range(1, max_iter + 1):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        if abs(a - b) <= tol * a:
            return a, n
    raise ArithmeticError("AGM did not converge")


class EllipticCache:
    """Memo of complete elliptic integrals K(k) = pi / (2 AGM(1, k')).

    Entries map (k, k') to (K(k), AGM iterations). Reads are lock-free dict
    lookups; inserts take a lock and never overwrite.
    """

    def __init__(self, max_size: int = 100000):
        self._data = {}
        self._lock = threading.Lock()
        self.max_size = max_size

    def __len__(self):
        return len(self._data)

    def get(self, k: float, kp: Optional[float] = None):
        if kp is None:
            kp = math.sqrt((1.0 - k) * (1.0 + k))
        # near k = 1 the complement carries the information, so key on both
        key = (k, kp)
        hit = self._data.get(key)
        if hit is not None:
            return hit
        m, n = agm(1.0, kp)
        val = (HALF_PI / m, n)
        if len(self._data) < self.max_size:
            with self._lock:
                self._data.setdefault(key, val)
        return val

    def K(self, k: float, kp: Optional[float] = None) -> float:
        return self.get(k, kp)[0]


DEFAULT_CACHE = EllipticCache()


def ellipk(k: float, cache: EllipticCache = DEFAULT_CACHE) -> float:
    """Complete elliptic integral of the first kind, modulus k in [0, 1)."""
    if not 0.0 <= k < 1.0:
        raise ValueError("modulus must lie in [0, 1)")
    return cache.K(k)


def _comp(r: float) -> float:
    return math.sqrt((1.0 - r) * (1.0 + r))


def _mu_pair(r: float, rp: float, cache: EllipticCache) -> float:
    if r < SMALL:
        return math.log(4.0 / r)
    if rp < SMALL:
        return QUARTER_PI2 / math.log(4.0 / rp)
    return HALF_PI * cache.K(rp, r) / cache.K(r, rp)


def groetzsch_mu(r: float, cache: EllipticCache = DEFAULT_CACHE) -> float:
    """mu(r) = (pi/2) K(r') / K(r), r' = sqrt(1 - r^2), for r in (0, 1)."""
    if not 0.0 < r < 1.0:
        raise ValueError("groetzsch_mu needs r in (0, 1)")
    return _mu_pair(r, _comp(r), cache)


def _mu_t(t: float, cache):
    # mu(e^t) and d mu / dt for t <= log(1/sqrt 2)
    r = math.exp(t)
    rp = _comp(r)
    if r < SMALL:
        return math.log(4.0) - t, -1.0
    Kr = cache.K(r, rp)
    return HALF_PI * cache.K(rp, r) / Kr, -QUARTER_PI2 / (rp * rp * Kr * Kr)


def _solve_small(y: float, cache) -> float:
    """t = log r with mu(r) = y >= pi/2, r <= 1/sqrt(2)."""
    t_top = -0.5 * math.log(2.0)
    lo, hi = math.log(2.0) - y, min(LOG4 - y, t_top)
    while _mu_t(lo, cache)[0] < y:
        lo -= 1.0
    if lo >= hi:
        lo = hi - 1.0
    t = 0.5 * (lo + hi)
    for _ in range(100):
        f, df = _mu_t(t, cache)
        f -= y
        if f > 0:
            lo = t
        else:
            hi = t
        step = f / df
        t_new = t - step
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) <= 1e-16 * max(1.0, abs(t)):
            t = t_new
            break
        t = t_new
    return t


def mu_inverse_pair(y: float, cache: EllipticCache = DEFAULT_CACHE):
    """(s, s') with mu(s) = y and s' = sqrt(1 - s^2), both to full accuracy."""
    if y == math.inf:
        return 0.0, 1.0
    if y <= 0.0:
        return 1.0, 0.0
    if y >= HALF_PI:
        s = math.exp(_solve_small(y, cache))
        return s, _comp(s)
    sp = math.exp(_solve_small(QUARTER_PI2 / y, cache))
    return _comp(sp), sp


def groetzsch_mu_inverse(y: float, cache: EllipticCache = DEFAULT_CACHE) -> float:
    return mu_inverse_pair(y, cache)[0]


def _phi_pair(K: float, r: float, rp: float, cache):
    if r == 0.0:
        return 0.0, 1.0
    if rp == 0.0:
        return 1.0, 0.0
    return mu_inverse_pair(_mu_pair(r, rp, cache) / K, cache)


def phi_K(K: float, r: float, cache: EllipticCache = DEFAULT_CACHE) -> float:
    """Hersch-Pfluger distortion phi_K(r) = mu^{-1}(mu(r) / K).

    K < 1 is accepted and gives the inverse function phi_{1/K}.
    """
    if not K > 0:
        raise ValueError("K must be positive")
    if not 0.0 <= r <= 1.0:
        raise ValueError("r must lie in [0, 1]")
    return _phi_pair(K, r, _comp(r), cache)[0]


def phi_K_pair(K: float, r: float, rp: Optional[float] = None,
               cache: EllipticCache = DEFAULT_CACHE):
    """(phi_K(r), its complement sqrt(1 - phi_K(r)^2)) from the pair (r, r').

    Passing the complement keeps compositions accurate where phi_K(r)
    rounds to 1 in double precision.
    """
    if not K > 0:
        raise ValueError("K must be positive")
    if rp is None:
        if not 0.0 <= r <= 1.0:
            raise ValueError("r must lie in [0, 1]")
        rp = _comp(r)
    return _phi_pair(K, r, rp, cache)


def M_K(K: float, x: float, cache: EllipticCache = DEFAULT_CACHE) -> float:
    """M_K(x) = 2 artanh(phi_K(tanh(x/2))).

    Evaluated as 2 log((1+s)/s') with s = phi_K(tanh(x/2)) and s' its
    complement, which stays accurate when s is close to 1.
    """
    if not K > 0:
        raise ValueError("K must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 0.0
    h = 0.5 * x
    r, rp = math.tanh(h), 1.0 / math.cosh(h) if h < 700 else 2.0 * math.exp(-h)
    s, sp = _phi_pair(K, r, rp, cache)
    if sp == 0.0:
        return math.inf
    return 2.0 * math.log((1.0 + s) / sp)


def M_K_array(K: float, xs) -> np.ndarray:
    return np.array([M_K(K, float(x)) for x in np.ravel(xs)]).reshape(np.shape(xs))


@dataclass
class MKReport:
    K: float
    points: int
    increasing: bool
    concave: bool
    vuorinen: bool
    max_second_diff: float
    min_vuorinen_margin: float

    @property
    def ok(self) -> bool:
        return self.increasing and self.concave and self.vuorinen

    def to_dict(self):
        d = asdict(self)
        d["ok"] = self.ok
        return d


def verify_MK_properties(K: float, grid=None, concavity_tol: float = 1e-9) -> MKReport:
    """Strict increase, concavity (second differences <= tol) and
    M_K(x) <= K (x + log 4) on a grid (default 2000 points of [0, 20])."""
    xs = np.linspace(0.0, 20.0, 2000) if grid is None else np.asarray(grid, dtype=float)
    m = M_K_array(K, xs)
    inc = bool(np.all(np.diff(m) > 0))
    h = np.diff(xs)
    # second divided differences scaled to a uniform-grid second difference
    d2 = np.diff(np.diff(m) / h) * h[1:] if len(xs) > 2 else np.zeros(0)
    mx = float(d2.max()) if d2.size else 0.0
    margin = K * (xs + LOG4) - m
    return MKReport(float(K), int(xs.size), inc, bool(mx <= concavity_tol),
                    bool(np.all(margin >= 0)), mx, float(margin.min()))


def qc_schwarz_pick_check(K: float, samples: Iterable, slack: float = 1e-9) -> bool:
    """True iff rho_out <= M_K(rho_in) + slack for every (rho_in, rho_out)."""
    return all(r_out <= M_K(K, float(r_in)) + slack for r_in, r_out in samples)


def stretch(K: float):
    """The K-quasiconformal stretch x + iy -> Kx + iy of the upper half-plane."""
    return lambda z: K * np.real(z) + 1j * np.imag(z)


def stretch_samples(K: float, n: int, rng: np.random.Generator, scale: float = 5.0):
    """(rho_in, rho_out) pairs for the stretch map on random point pairs."""
    from .hypmetric import rho_halfplane

    z1 = scale * (rng.standard_normal(n) + 1j * rng.random(n)) + 1e-3j
    z2 = scale * (rng.standard_normal(n) + 1j * rng.random(n)) + 1e-3j
    f = stretch(K)
    rin = rho_halfplane(z1, z2, "upper")
    rout = rho_halfplane(f(z1), f(z2), "upper")
    return list(zip(np.atleast_1d(rin).tolist(), np.atleast_1d(rout).tolist()))


__all__ = [
    "agm", "EllipticCache", "DEFAULT_CACHE", "ellipk", "groetzsch_mu", "groetzsch_mu_inverse",
    "mu_inverse_pair", "phi_K", "phi_K_pair", "M_K", "M_K_array", "MKReport", "verify_MK_properties",
    "qc_schwarz_pick_check", "stretch", "stretch_samples",
]
