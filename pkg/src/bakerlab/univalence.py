"""Numerical witnesses of non-univalence: critical points of k with the
Landau derivative estimate, and collision search F(z1) = F(z2)."""
from __future__ import annotations

import cmath
import json
import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .maps import RegionTag, as_map, region_of
from .params import ConstructionParams, Family

log = logging.getLogger(__name__)

CRITICAL_POINT_PAIRING = "critical_point_pairing"
NEWTON_2D = "newton_2d"


# ---------------------------------------------------------------- critical points of k

class CriticalPoints(list):
    """Roots of k' with the branch indices used and those that failed."""

    def __init__(self, roots=(), branches=(), failed=()):
        super().__init__(roots)
        self.branches = list(branches)
        self.failed = list(failed)


def _k1_prime(z: complex, L: float):
    u = cmath.exp(-z)
    e = u * cmath.exp(u - L)
    return 1 - e, e * (1 + u)      # k'(z), k''(z)


def default_branches(p: ConstructionParams, count: int = 4) -> list:
    """Branch indices j whose roots satisfy Re z < x1 (so they sit in T):
    |L + 2 pi i j| must exceed e^{-x1}."""
    need = 1.5 * math.exp(-p.x1)
    j0 = 0 if p.L > need else int(math.ceil(math.sqrt(need ** 2 - p.L ** 2) / (2 * math.pi)))
    js = [j0 + i for i in range(count)]
    return sorted(set(js + [-j for j in js]))


def critical_points_k1(p: ConstructionParams, branch_range: Optional[Iterable[int]] = None,
                       tol: float = 1e-10, max_iter: int = 60) -> CriticalPoints:
    """Zeros of k'(z) = 1 - e^{-z} exp(e^{-z} - L), one per branch index j.

    With u = e^{-z} the equation is u + Log u = L + 2 pi i j. Newton on that
    equation starts from u = w - log w, w = L + 2 pi i j; the root
    z = -Log u (imaginary part in (-pi, pi]) is then polished by Newton on k'.
    All z + 2 pi i n are critical points as well.
    """
    if p.family is not Family.THEOREM1:
        raise ValueError("critical_points_k1 needs theorem1 params")
    branches = default_branches(p) if branch_range is None else list(branch_range)
    roots, used, failed = [], [], []
    L = float(p.L)
    for j in branches:
        w = complex(L, 2 * math.pi * j)
        u = w - cmath.log(w)
        for _ in range(max_iter):
            du = (u + cmath.log(u) - w) / (1 + 1 / u)
            u -= du
            if abs(du) <= 1e-15 * abs(u):
                break
        z = -cmath.log(u)
        ok = False
        for _ in range(max_iter):
            f, df = _k1_prime(z, L)
            if not (math.isfinite(abs(f)) and math.isfinite(abs(df))) or df == 0:
                break
            if abs(f) < 1e-14:
                ok = True
                break
            z -= f / df
        f, _ = _k1_prime(z, L)
        ok = ok or abs(f) < tol
        if ok and abs(f) < tol:
            roots.append(z)
            used.append(j)
        else:
            log.warning("critical point branch %d did not converge (|k'| = %.3g)", j, abs(f))
            failed.append(j)
    return CriticalPoints(roots, used, failed)


# ---------------------------------------------------------------- Landau estimate

@dataclass
class LandauRow:
    x: float
    in_T: bool
    abs_k: float
    two_x: float
    value_bound: bool
    log_abs_dk: float
    log_lower: float          # log(e^{x-L} - 1)
    half_x: float             # log e^{x/2}
    derivative_bound: bool    # |k'| >= e^{x-L} - 1
    chain_bound: bool         # e^{x-L} - 1 >= e^{x/2}
    derivative_vs_half: bool  # |k'| >= e^{x/2}
    ratio_k_over_x: float


@dataclass
class LandauReport:
    L: float
    rows: list

    @property
    def all_value_bounds(self) -> bool:
        return all(r.value_bound for r in self.rows)

    @property
    def all_derivative_bounds(self) -> bool:
        return all(r.derivative_bound and r.derivative_vs_half for r in self.rows)

    def to_dict(self):
        return {"L": self.L, "rows": [asdict(r) for r in self.rows],
                "all_value_bounds": self.all_value_bounds,
                "all_derivative_bounds": self.all_derivative_bounds}


def _log_expm1(a: float) -> float:
    # log(e^a - 1)
    if a > 40:
        return a + math.log1p(-math.exp(-a))
    if a <= 0:
        return -math.inf
    return math.log(math.expm1(a))


def landau_bound_check(p: ConstructionParams, x_grid: Iterable[float]) -> LandauReport:
    """|k(-x + i pi/2)| <= 2x and |k'(-x + i pi/2)| >= e^{x-L} - 1 >= e^{x/2}.

    At z = -x + i pi/2 the inner exponential is exactly e^{-z} = -i e^x; it
    is formed that way rather than through exp(-z), since the rounded pi/2
    would give it a spurious real part of size e^x * 1e-16. Moduli are
    compared in log form so that large x stays in range. The perturbation
    exp(-i e^x - L) has modulus e^{-L} whatever the phase.
    """
    if p.family is not Family.THEOREM1:
        raise ValueError("landau_bound_check needs theorem1 params")
    L = float(p.L)
    rows = []
    for x in x_grid:
        x = float(x)
        z = complex(-x, 0.5 * math.pi)
        in_t = region_of(z, p) is RegionTag.T
        # |k| = |c + z + exp(u - L)| with |exp(u - L)| = e^{-L}
        base = p.translation + z
        if x < 700:
            u = complex(0.0, -math.exp(x))
            pert = cmath.exp(-L) * cmath.exp(complex(0.0, u.imag))
            abs_k = abs(base + pert)
            # k' = 1 - u exp(u - L) = 1 + i e^{x-L} e^{-i e^x}
            a = x - L
            rot = cmath.exp(complex(0.0, u.imag))
            if a < 700:
                log_dk = math.log(abs(1 + 1j * math.exp(a) * rot))
            else:
                log_dk = a + math.log(abs(math.exp(-a) + 1j * rot))
        else:
            # phase of e^x unavailable: keep the certified interval ends
            abs_k = abs(base) + math.exp(-L)
            a = x - L
            log_dk = _log_expm1(a)
        log_lower = _log_expm1(x - L)
        rows.append(LandauRow(
            x=x, in_T=bool(in_t), abs_k=abs_k, two_x=2 * x, value_bound=bool(abs_k <= 2 * x),
            log_abs_dk=log_dk, log_lower=log_lower, half_x=0.5 * x,
            derivative_bound=bool(log_dk >= log_lower - 1e-12),
            chain_bound=bool(log_lower >= 0.5 * x),
            derivative_vs_half=bool(log_dk >= 0.5 * x),
            ratio_k_over_x=abs_k / x,
        ))
    return LandauReport(L, rows)


# ---------------------------------------------------------------- collisions

@dataclass
class CollisionReport:
    z1: complex
    z2: complex
    residual: float
    both_in_domain: bool
    method: str

    @property
    def separation(self) -> float:
        return abs(self.z1 - self.z2)

    def to_dict(self):
        return {"z1": [self.z1.real, self.z1.imag], "z2": [self.z2.real, self.z2.imag],
                "residual": self.residual, "both_in_domain": self.both_in_domain,
                "method": self.method, "separation": self.separation}


def reports_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=2)


def non_univalence_witnessed(reports) -> bool:
    """True if some collision has both points in the domain. Absence of
    witnesses says nothing about univalence."""
    return any(r.both_in_domain for r in reports)


def _wirtinger(m, z):
    if m.wirtinger is not None:
        dz, dzb = m.wirtinger(np.array([z]))
        return complex(dz[0]), complex(dzb[0])
    from .qrcheck import finite_diff_wirtinger
    return finite_diff_wirtinger(m, complex(z))


def _value(m, z):
    w, bad = m.evaluate(np.array([z]))
    return None if bad[0] else complex(w[0])


def _newton_real(G, dG, z, tol, max_iter):
    """Newton for G(z) = 0 with G real-differentiable: dG = a dz + b dzbar."""
    for _ in range(max_iter):
        g = G(z)
        if g is None:
            return None
        if abs(g) < tol:
            return z
        a, b = dG(z)
        det = abs(a) ** 2 - abs(b) ** 2
        if det == 0 or not math.isfinite(det):
            return None
        dz = (-g * a.conjugate() + b * g.conjugate()) / det
        z = z + dz
        if not math.isfinite(abs(z)):
            return None
    g = G(z)
    return z if g is not None and abs(g) < tol else None


def critical_points_h1(k_range: Iterable[int] = range(-2, 3)) -> list:
    """Zeros of h'(z) = 1 + e^z: i pi + 2 pi i k."""
    return [complex(0.0, math.pi + 2 * math.pi * k) for k in k_range]


def collision_search(f, seeds, method: str = CRITICAL_POINT_PAIRING,
                     domain_check: Optional[Callable] = None, offsets=(0.05, 0.2, 0.5),
                     angles: int = 4, sep_min: float = 1e-6, accept: float = 1e-9,
                     tol: float = 1e-13, max_iter: int = 60) -> list:
    """Distinct points with equal images.

    ``critical_point_pairing``: ``seeds`` are critical points c; for each
    offset e and angle the point z1 = c + e e^{i theta} is fixed and
    F(z2) = F(z1) is solved by Newton from the mirror image 2c - z1.
    ``newton_2d``: ``seeds`` are pairs (z1, z2); the separation
    s = z1 - z2 is held fixed and F(z) - F(z - s) = 0 is solved in z, so the
    trivial solution z1 = z2 is excluded by construction.
    Newton works with both Wirtinger derivatives, so non-holomorphic pieces
    of F are handled. ``domain_check`` defaults to the escape-policy
    membership oracle of the map.
    """
    m = as_map(f)
    seeds = list(seeds)
    if len(seeds) < 1:
        raise ValueError("need seeds")
    if domain_check is None:
        from .dynamics import is_member
        domain_check = lambda z: is_member(m, z)       # noqa: E731
    out = []
    scale_tol = lambda w: tol * max(1.0, abs(w))         # noqa: E731

    def record(z1, z2):
        w1, w2 = _value(m, z1), _value(m, z2)
        if w1 is None or w2 is None:
            return
        res = abs(w1 - w2)
        if res < accept and abs(z1 - z2) > sep_min:
            inside = domain_check(np.array([z1, z2]))
            out.append(CollisionReport(complex(z1), complex(z2), float(res),
                                       bool(np.all(inside)), method))

    if method == CRITICAL_POINT_PAIRING:
        for c in seeds:
            c = complex(c)
            for e in offsets:
                for k in range(angles):
                    z1 = c + e * cmath.exp(1j * (math.pi * k / angles + 0.1))
                    w1 = _value(m, z1)
                    if w1 is None:
                        continue
                    G = lambda z: (lambda v: None if v is None else v - w1)(_value(m, z))  # noqa: E731
                    z2 = _newton_real(G, lambda z: _wirtinger(m, z), 2 * c - z1,
                                      scale_tol(w1), max_iter)
                    if z2 is not None:
                        record(z1, z2)
    elif method == NEWTON_2D:
        for pair in seeds:
            a, b = complex(pair[0]), complex(pair[1])
            s = a - b
            if abs(s) <= sep_min:
                continue

            def G(z, s=s):
                v1, v2 = _value(m, z), _value(m, z - s)
                return None if v1 is None or v2 is None else v1 - v2

            def dG(z, s=s):
                a1, b1 = _wirtinger(m, z)
                a2, b2 = _wirtinger(m, z - s)
                return a1 - a2, b1 - b2

            w_a = _value(m, a)
            z1 = _newton_real(G, dG, a, scale_tol(w_a if w_a is not None else 1.0), max_iter)
            if z1 is not None:
                record(z1, z1 - s)
    else:
        raise ValueError(f"unknown method {method!r}")
    return out


__all__ = [
    "CriticalPoints", "critical_points_k1", "default_branches", "LandauRow", "LandauReport",
    "landau_bound_check", "CollisionReport", "collision_search", "critical_points_h1",
    "non_univalence_witnessed", "reports_json", "CRITICAL_POINT_PAIRING", "NEWTON_2D",
]
