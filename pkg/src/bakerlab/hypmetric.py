"""Hyperbolic distances: exact values in model domains and two-sided
bounds elsewhere (disk inclusion above, Koebe density below).

Density normalization: lambda_D(z) = 2 / (1 - |z|^2), so a half-plane has
density 1/dist and the Koebe bound reads lambda >= 1 / (2 dist).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .maps import eval_F
from .params import ConstructionParams

EXACT = "exact"
KOEBE = "koebe_density"
DISK_INCLUSION = "disk_inclusion"


class DomainError(ValueError):
    """A point lies outside the domain of the metric."""


class InclusionError(ValueError):
    """A disk required to lie inside the domain does not."""


def _acosh1p(u):
    # arccosh(1 + u) without cancellation for small u
    return np.log1p(u + np.sqrt(u * (u + 2.0)))


def _ret(v):
    return float(v) if np.ndim(v) == 0 else v


def rho_disk(z1, z2):
    """Hyperbolic distance in the unit disk, 2 artanh |(z1-z2)/(1-conj(z1) z2)|."""
    z1 = np.asarray(z1, dtype=np.complex128)
    z2 = np.asarray(z2, dtype=np.complex128)
    a1, a2 = np.abs(z1), np.abs(z2)
    if np.any(a1 >= 1) or np.any(a2 >= 1):
        raise DomainError("rho_disk needs |z| < 1")
    u = 2 * np.abs(z1 - z2) ** 2 / ((1 - a1) * (1 + a1) * (1 - a2) * (1 + a2))
    return _ret(_acosh1p(u))


def rho_halfplane(z1, z2, side: str = "right"):
    """Hyperbolic distance in {Re z > 0} (``side="right"``) or {Im z > 0}."""
    z1 = np.asarray(z1, dtype=np.complex128)
    z2 = np.asarray(z2, dtype=np.complex128)
    if side == "right":
        h1, h2 = z1.real, z2.real
    elif side == "upper":
        h1, h2 = z1.imag, z2.imag
    else:
        raise ValueError("side must be 'right' or 'upper'")
    if np.any(h1 <= 0) or np.any(h2 <= 0):
        raise DomainError(f"rho_halfplane({side}) needs points inside the half-plane")
    return _ret(_acosh1p(np.abs(z1 - z2) ** 2 / (2 * h1 * h2)))


def rho_strip(z1, z2, halfwidth: float = math.pi / 2):
    """Hyperbolic distance in {|Im z| < halfwidth}, transported from the right
    half-plane by z -> exp(pi z / (2 halfwidth))."""
    z1 = np.asarray(z1, dtype=np.complex128)
    z2 = np.asarray(z2, dtype=np.complex128)
    if np.any(np.abs(z1.imag) >= halfwidth) or np.any(np.abs(z2.imag) >= halfwidth):
        raise DomainError("rho_strip needs |Im z| < halfwidth")
    k = math.pi / (2 * halfwidth)
    shift = 0.5 * k * (z1.real + z2.real)       # common scaling cancels in the distance
    return rho_halfplane(np.exp(k * z1 - shift), np.exp(k * z2 - shift))


# ---------------------------------------------------------------- model domains

@dataclass(frozen=True)
class Disk:
    center: complex = 0j
    radius: float = 1.0

    def contains(self, z):
        return np.abs(np.asarray(z) - self.center) < self.radius

    def boundary_distance(self, z):
        return np.maximum(self.radius - np.abs(np.asarray(z) - self.center), 0.0)

    def rho(self, z1, z2):
        c, r = self.center, self.radius
        return rho_disk((np.asarray(z1) - c) / r, (np.asarray(z2) - c) / r)


@dataclass(frozen=True)
class HalfPlane:
    """{Re z > offset} (right) or {Im z > offset} (upper)."""

    side: str = "right"
    offset: float = 0.0

    def _height(self, z):
        z = np.asarray(z)
        return (z.real if self.side == "right" else z.imag) - self.offset

    def contains(self, z):
        return self._height(z) > 0

    def boundary_distance(self, z):
        return np.maximum(self._height(z), 0.0)

    def rho(self, z1, z2):
        s = self.offset if self.side == "right" else 1j * self.offset
        return rho_halfplane(np.asarray(z1) - s, np.asarray(z2) - s, self.side)


@dataclass(frozen=True)
class Strip:
    """{|Im z - center| < halfwidth}."""

    halfwidth: float = math.pi / 2
    center: float = 0.0

    def contains(self, z):
        return np.abs(np.asarray(z).imag - self.center) < self.halfwidth

    def boundary_distance(self, z):
        return np.maximum(self.halfwidth - np.abs(np.asarray(z).imag - self.center), 0.0)

    def rho(self, z1, z2):
        s = 1j * self.center
        return rho_strip(np.asarray(z1) - s, np.asarray(z2) - s, self.halfwidth)


# ---------------------------------------------------------------- bounds

@dataclass(frozen=True)
class HyperbolicBound:
    lo: float
    hi: float
    lo_method: str
    hi_method: str

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi):
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")
        if EXACT in (self.lo_method, self.hi_method) and self.lo_method == self.hi_method \
                and self.lo != self.hi:
            raise ValueError("exact bound must have lo == hi")

    @classmethod
    def exact(cls, value: float) -> "HyperbolicBound":
        return cls(float(value), float(value), EXACT, EXACT)

    def contains(self, v: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= v <= self.hi + tol


def disk_inside(center: complex, r: float, domain_check: Callable, n_boundary: int = 256) -> bool:
    """Sample ``n_boundary`` points of the circle |z - center| = r against the
    membership oracle ``domain_check`` (plus the center itself)."""
    th = 2 * np.pi * np.arange(n_boundary) / n_boundary
    pts = np.concatenate([[center], center + r * np.exp(1j * th)])
    return bool(np.all(domain_check(pts)))


def rho_upper_by_disk_inclusion(z1, z2, r: float, domain_check: Optional[Callable] = None,
                                n_boundary: int = 256) -> float:
    """2 artanh(|z1 - z2| / r): the distance in D(z2, r), which dominates the
    distance in any domain containing that disk (Schwarz-Pick)."""
    d = abs(complex(z1) - complex(z2))
    if not d < r:
        raise ValueError(f"|z1 - z2| = {d:.6g} is not below the radius {r:.6g}")
    if domain_check is not None and not disk_inside(complex(z2), r, domain_check, n_boundary):
        raise InclusionError(f"D({complex(z2)}, {r}) is not inside the domain")
    return float(2 * np.arctanh(d / r))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def koebe_integral(path, boundary_dist_fn: Callable, subdivisions: int = 64) -> float:
    """Integral of |dz| / (2 dist(z)) along a polyline; inf if the path
    touches the boundary."""
    path = np.asarray(path, dtype=np.complex128)
    a, b = path[:-1], path[1:]
    s = (np.arange(subdivisions)[:, None] + 0.5 * (_GL_X[None, :] + 1)) / subdivisions
    wts = np.broadcast_to(_GL_W[None, :] / (2 * subdivisions), s.shape)
    pts = a[:, None, None] + (b - a)[:, None, None] * s[None]
    d = np.asarray(boundary_dist_fn(pts), dtype=float)
    if np.any(~(d > 0)):
        return math.inf
    seg = np.abs(b - a)[:, None, None]
    return float(np.sum(seg * wts[None] / (2 * d)))


def _arc(a, b, theta, n=129):
    s = np.linspace(0.0, 1.0, n)
    if abs(theta) < 1e-9:
        return a + (b - a) * s
    e = np.exp(2j * theta)
    return a + (b - a) * (np.exp(2j * theta * s) - 1) / (e - 1)


def channel_lower_bound(x: float, x2: float, y1: float) -> float:
    """|x - x2| / (pi - y1): every point of a curve that crosses a channel of
    height pi - y1 has density >= 1 / (pi - y1)."""
    return abs(x - x2) / (math.pi - y1)


@dataclass(frozen=True)
class KoebeLower:
    value: float
    start_value: float
    channel: Optional[float] = None

    def __float__(self):
        return self.value


def rho_lower_by_koebe(path, boundary_dist_fn: Callable, channel: Optional[dict] = None,
                       sweep: int = 41, maxiter: int = 400) -> KoebeLower:
    """Smallest Koebe integral of 1 / (2 dist) over a family of candidate paths.

    A two-point path is deformed through the circular arcs joining its
    endpoints (these contain the geodesics of disks and half-planes, where
    the result is at most half the exact distance). Longer polylines have
    their interior vertices optimized. ``channel`` = {"x", "x2", "y1"} adds the
    closed-form channel bound separately.
    """
    path = np.asarray(path, dtype=np.complex128)
    start = koebe_integral(path, boundary_dist_fn)
    if not math.isfinite(start):
        raise DomainError("path exits the domain")
    if len(path) == 2:
        a, b = path
        lim = 0.5 * math.pi - 1e-3

        def cost(t):
            return koebe_integral(_arc(a, b, t), boundary_dist_fn, subdivisions=4)

        grid = np.linspace(-lim, lim, sweep)
        vals = np.array([cost(t) for t in grid])
        k = int(np.argmin(vals))
        lo_t, hi_t = grid[max(k - 1, 0)], grid[min(k + 1, sweep - 1)]
        res = minimize_scalar(cost, bounds=(lo_t, hi_t), method="bounded",
                              options={"xatol": 1e-10})
        best = min(vals[k], res.fun, start)
    else:
        inner = path[1:-1]
        x0 = np.concatenate([inner.real, inner.imag])

        def cost(v):
            n = len(inner)
            pts = np.concatenate([[path[0]], v[:n] + 1j * v[n:], [path[-1]]])
            return koebe_integral(pts, boundary_dist_fn)

        res = minimize(cost, x0, method="Nelder-Mead",
                       options={"maxiter": maxiter, "xatol": 1e-6, "fatol": 1e-9})
        best = min(res.fun, start)
    ch = None
    if channel is not None:
        ch = channel_lower_bound(channel["x"], channel["x2"], channel["y1"])
    return KoebeLower(float(best), float(start), ch)


def model_bound(z1, z2, domain) -> HyperbolicBound:
    """Exact distance in a model domain as a degenerate interval."""
    return HyperbolicBound.exact(domain.rho(z1, z2))


def general_bound(z1, z2, boundary_dist_fn: Callable, domain_check: Callable,
                  n_boundary: int = 256) -> HyperbolicBound:
    """[Koebe lower, disk-inclusion upper] for a simply connected domain
    known only through a distance estimate and a membership oracle."""
    lo = rho_lower_by_koebe([z1, z2], boundary_dist_fn).value
    r = float(boundary_dist_fn(np.array([z2]))[0])
    try:
        hi = rho_upper_by_disk_inclusion(z1, z2, r, domain_check, n_boundary)
    except ValueError:
        hi = math.inf
    return HyperbolicBound(min(lo, hi), hi, KOEBE, DISK_INCLUSION)


# ---------------------------------------------------------------- Schwarz-Pick

class OrbitExitError(DomainError):
    """An orbit left the model domain."""


def hyperbolic_steps(f, domain, z0, n: int) -> np.ndarray:
    """rho_U(f^{k+1}(z0), f^k(z0)) for k = 0 .. n-1."""
    pts = [complex(z0)]
    for _ in range(n):
        pts.append(complex(f(pts[-1])))
    pts = np.array(pts)
    if not np.all(domain.contains(pts)):
        raise OrbitExitError("orbit leaves the model domain")
    return np.asarray(domain.rho(pts[1:], pts[:-1]), dtype=float)


def schwarz_pick_step_monotonicity(f, domain, z0, n: int, slack: float = 1e-9) -> bool:
    """True iff the hyperbolic step sequence of the orbit is non-increasing."""
    s = hyperbolic_steps(f, domain, z0, n)
    return bool(np.all(np.diff(s) <= slack))


# ---------------------------------------------------------------- w-triple

def w0_contains(p: ConstructionParams):
    """Membership oracle of W0 = {Re z < x0, Im z > 2 pi}."""
    return lambda z: (np.asarray(z).real < p.x0) & (np.asarray(z).imag > 2 * np.pi)


def channel_distance(x2: float, y1: float, top: float = math.pi):
    """Distance to the walls {Re z <= x2, Im z in {y1, top}}, the strip-geometry
    stand-in for the Julia continua bounding the lower channel."""
    def dist(z):
        z = np.asarray(z, dtype=np.complex128)
        dx = np.maximum(z.real - x2, 0.0)
        d_top = np.hypot(dx, z.imag - top)
        d_bot = np.hypot(dx, z.imag - y1)
        return np.minimum(d_top, d_bot)
    return dist


@dataclass
class WTripleReport:
    x: float
    w1: complex
    w2: complex
    w3: complex
    r1: float
    r2: float
    dist23: float
    near: bool
    disk_in_w0: bool
    in_disk: bool
    upper23: float
    rho_disk23: Optional[float]
    lower12: float
    koebe12: float
    y1: float
    x2: float

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("w1", "w2", "w3"):
            d[k] = [d[k].real, d[k].imag]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def w_radii(p: ConstructionParams, delta: float = 0.1):
    r1 = 2 * math.pi * (p.alpha + p.m) + delta
    r2 = 2 * math.pi * (2 * p.alpha + 2 * p.m - 3) - delta
    return r1, r2


def verify_w_triple(p: ConstructionParams, x: float, delta: float = 0.1,
                    y1: float = -4 * math.pi, x2: Optional[float] = None,
                    n_boundary: int = 256) -> WTripleReport:
    """The points w1 = -x - 2 pi i, w2 = F(w1), w3 = F(w2) and both metric
    estimates: the upper bound 2 artanh(r1/r2) for rho(w2, w3) (valid when
    |w2 - w3| < r1 and D(w3, r2) lies in W0) and the channel lower bound
    for rho(w1, w2), taken over real parts between Re w1 and x2.
    """
    x2 = p.x1 if x2 is None else x2
    r1, r2 = w_radii(p, delta)
    if not r1 < r2:
        raise ValueError("delta too large: need r1 < r2")
    w1 = complex(-x, -2 * math.pi)
    w2 = complex(eval_F(w1, p))
    w3 = complex(eval_F(w2, p))
    d23 = abs(w2 - w3)
    near = d23 < r1
    inside = disk_inside(w3, r2, w0_contains(p), n_boundary)
    rho23 = None
    if near and inside:
        rho23 = rho_upper_by_disk_inclusion(w2, w3, r2)
    upper = float(2 * np.arctanh(r1 / r2))
    lower = channel_lower_bound(w1.real, x2, y1)
    ym = 0.5 * (math.pi + y1)
    turn = x2 + 2 * math.pi
    path = [w1, complex(w1.real, ym), complex(turn, ym), complex(turn, w2.imag), w2]
    koebe = rho_lower_by_koebe(path, channel_distance(x2, y1)).value
    return WTripleReport(float(x), w1, w2, w3, r1, r2, d23, bool(near), bool(inside),
                         bool(near and inside), upper, rho23, lower, koebe, y1, x2)


def w_triple_ladder(p: ConstructionParams, xs, **kw):
    return [verify_w_triple(p, x, **kw) for x in xs]


def ladder_csv(reports) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["x", "lower12", "upper23", "in_disk"])
    for r in reports:
        wr.writerow([repr(r.x), repr(r.lower12), repr(r.upper23), str(r.in_disk).lower()])
    return buf.getvalue()


__all__ = [
    "DomainError", "InclusionError", "OrbitExitError", "HyperbolicBound", "KoebeLower",
    "Disk", "HalfPlane", "Strip", "rho_disk", "rho_halfplane", "rho_strip",
    "disk_inside", "rho_upper_by_disk_inclusion", "koebe_integral", "rho_lower_by_koebe",
    "channel_lower_bound", "model_bound", "general_bound", "hyperbolic_steps",
    "schwarz_pick_step_monotonicity", "w0_contains", "channel_distance", "WTripleReport",
    "w_radii", "verify_w_triple", "w_triple_ladder", "ladder_csv",
]
