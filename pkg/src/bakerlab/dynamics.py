"""Orbit iteration with escape detection, and the orbit diagnostics behind
the König-ratio classification of Baker domains."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _escape as E
from .maps import (INTERPOLATION_TAGS, as_map, named_map, region_codes,
                   sample_interpolation_zone, _F_raw)
from .params import ConstructionParams, Family

DOUBLY = "doubly_parabolic"
SIMPLY = "simply_parabolic"
HYPERBOLIC = "hyperbolic"
INCONCLUSIVE = "inconclusive"


# ---------------------------------------------------------------- escape

@dataclass(frozen=True)
class EscapePolicy:
    """Directional escape test.

    A point has escaped at step n once the chosen coordinate exceeds
    ``threshold`` after increasing on ``consecutive`` successive steps.
    |w| > ``modulus_cap`` and exponent overflow end the orbit. They count as
    escape if the coordinate is already past the threshold, and overflow
    also counts when the overflowing term points along the escape
    coordinate (its phase is known whenever the inner values are finite).
    """

    direction: str = "imag"
    threshold: float = 50.0
    consecutive: int = 3
    modulus_cap: float = 1e8

    def __post_init__(self):
        if self.direction not in E.DIRECTIONS:
            raise ValueError(f"direction must be one of {sorted(E.DIRECTIONS)}")

    def coordinate(self, w):
        w = np.asarray(w)
        if self.direction == "imag":
            return w.imag
        if self.direction == "real":
            return w.real
        if self.direction == "-real":
            return -w.real
        return np.abs(w)

    def args(self):
        return (E.DIRECTIONS[self.direction], float(self.threshold), int(self.consecutive),
                float(self.modulus_cap))


_DEFAULT_DIRECTION = {"fatou": "real", "h1": "imag", "k1": "imag", "F1": "imag",
                      "h2": "-real", "k2": "-real", "F2": "-real"}


def default_policy(map_or_name) -> EscapePolicy:
    """Escape direction of each family: Im for theorem1, Re for Fatou's
    example, -Re for theorem2, |w| otherwise."""
    name = getattr(map_or_name, "name", map_or_name)
    return EscapePolicy(direction=_DEFAULT_DIRECTION.get(name, "modulus"))


def _overflow_escapes(m, z, policy):
    """Per point: does the overflow of m at z head toward the escape direction?"""
    z = np.ascontiguousarray(np.atleast_1d(z), dtype=np.complex128)
    if m.kernel is None or z.size == 0:
        return np.zeros(z.shape, dtype=bool)
    return E.overflow_escapes_array(z, *E.kernel_args(m.kernel), policy.args()[0])


def _escape_times_numpy(m, z, n_max, policy):
    z = z.copy()
    code = np.full(z.shape, E.BOUNDED, dtype=np.int64)
    idx = np.arange(z.size)
    prev = policy.coordinate(z)
    run = np.zeros(z.size, dtype=np.int64)
    for n in range(1, n_max + 1):
        if idx.size == 0:
            break
        w, bad = m.evaluate(z)
        cur = np.where(bad, -np.inf, policy.coordinate(np.where(bad, 0, w)))
        run = np.where(cur > prev, run + 1, 0)
        esc = ~bad & (cur > policy.threshold) & (run >= policy.consecutive)
        capped = ~bad & ~esc & (np.abs(np.where(bad, 0, w)) > policy.modulus_cap)
        toward = (prev[bad] > policy.threshold) | _overflow_escapes(m, z[bad], policy)
        code[idx[bad]] = np.where(toward, n, E.OVERFLOW)
        code[idx[esc]] = n
        code[idx[capped]] = np.where(cur[capped] > policy.threshold, n, E.OVERFLOW)
        keep = ~(bad | esc | capped)
        idx, z, prev, run = idx[keep], w[keep], cur[keep], run[keep]
    return code


def escape_times(f, z, n_max: int = 200, policy: Optional[EscapePolicy] = None,
                 parallel: bool = True) -> np.ndarray:
    """Escape step per starting point: n >= 1 if escaped at step n,
    -1 if still bounded after ``n_max`` steps, -2 on overflow toward a
    non-escaping direction."""
    m = as_map(f)
    policy = policy or default_policy(m)
    z = np.asarray(z, dtype=np.complex128)
    flat = np.ascontiguousarray(z.ravel())
    if m.kernel is not None:
        fn = E.codes_parallel if parallel else E.codes_serial
        out = fn(flat, *E.kernel_args(m.kernel), int(n_max), *policy.args())
    else:
        out = _escape_times_numpy(m, flat, int(n_max), policy)
    return out.reshape(z.shape)


def is_member(f, z, policy: Optional[EscapePolicy] = None, n_member: int = 200) -> np.ndarray:
    """Membership oracle of the escaping component: escape within n_member steps."""
    return escape_times(f, z, n_member, policy) > 0


# ---------------------------------------------------------------- orbits

@dataclass(frozen=True)
class OrbitRecord:
    points: np.ndarray
    steps: np.ndarray
    dists: np.ndarray
    ratios: np.ndarray
    terminated: str
    escape_index: Optional[int] = None
    hyp_lo: Optional[np.ndarray] = None
    hyp_hi: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.points)

    def with_distances(self, dists) -> "OrbitRecord":
        dists = np.asarray(dists, dtype=float)
        n = len(self.steps)
        d = np.full(len(self.points), np.nan)
        d[: len(dists)] = dists
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(d[:n] > 0, self.steps / d[:n], np.nan)
        lo, hi = hyperbolic_step_bounds(ratios)
        return OrbitRecord(self.points, self.steps, d, ratios, self.terminated,
                           self.escape_index, lo, hi)

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["n", "re", "im", "step", "dist", "ratio"])
        n_steps = len(self.steps)
        for n, w in enumerate(self.points):
            row = [n, repr(float(w.real)), repr(float(w.imag))]
            for arr in (self.steps, self.dists, self.ratios):
                v = arr[n] if n < len(arr) and (arr is not self.steps or n < n_steps) else np.nan
                row.append("" if not np.isfinite(v) else repr(float(v)))
            wr.writerow(row)
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def iterate(f, z0, n_max: int, policy: Optional[EscapePolicy] = None,
            stop_on_escape: bool = True) -> OrbitRecord:
    """Orbit w_0 .. w_N of ``f``.

    Stops at overflow or at |w| > modulus cap; stops at directional escape
    only when ``stop_on_escape``. ``escape_index`` is the first n where the
    policy declared escape.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    m = as_map(f)
    policy = policy or default_policy(m)
    pts = [complex(z0)]
    prev = float(policy.coordinate(pts[0]))
    run = 0
    escaped_at = None
    reason = "max_iter"
    for n in range(1, n_max + 1):
        w, bad = m.evaluate(np.array([pts[-1]]))
        if bad[0]:
            if prev > policy.threshold or _overflow_escapes(m, pts[-1], policy)[0]:
                escaped_at = n if escaped_at is None else escaped_at
                reason = "escaped"
            else:
                reason = "overflow"
            break
        w = complex(w[0])
        pts.append(w)
        cur = float(policy.coordinate(w))
        run = run + 1 if cur > prev else 0
        prev = cur
        if escaped_at is None and cur > policy.threshold and run >= policy.consecutive:
            escaped_at = n
            if stop_on_escape:
                reason = "escaped"
                break
        if abs(w) > policy.modulus_cap:
            if cur > policy.threshold:
                escaped_at = n if escaped_at is None else escaped_at
                reason = "escaped"
            else:
                reason = "overflow"
            break
    else:
        if escaped_at is not None:
            reason = "escaped"
    points = np.array(pts, dtype=np.complex128)
    steps = np.abs(np.diff(points))
    nan = np.full(len(points), np.nan)
    return OrbitRecord(points, steps, nan, np.full(len(steps), np.nan), reason, escaped_at)


def hyperbolic_step_bounds(ratios):
    """Interval for rho_U(w_n, w_{n+1}) from t = |w_{n+1}-w_n| / d_n.

    Lower: Koebe density 1/(2 dist) integrated along any path gives
    1/2 log(1+t). Upper: D(w_n, d_n) lies in U, giving 2 artanh(t) for t < 1.
    """
    t = np.asarray(ratios, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        lo = 0.5 * np.log1p(t)
        hi = np.where(t < 1, 2 * np.arctanh(np.minimum(t, 1.0)), np.inf)
    hi = np.where(np.isnan(t), np.nan, hi)
    return lo, hi


# ---------------------------------------------------------------- boundary distance

def boundary_distances(f, w, policy: Optional[EscapePolicy] = None, directions: int = 32,
                       r_max=None, n_member: int = 200, n_radii: int = 32,
                       bisections: int = 14) -> np.ndarray:
    """Batched ray-bisection estimate of dist(w, boundary of U).

    Every point gets ``directions`` rays; along each ray membership is
    sampled on a geometric radius grid from 1e-4 r_max to r_max, the first
    flip is bracketed, then bisected. The distance is the minimum over rays;
    rays without a flip contribute r_max. Points that are not members get 0.
    """
    m = as_map(f)
    policy = policy or default_policy(m)
    w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
    n = w.size
    r_max = np.broadcast_to(np.asarray(100.0 if r_max is None else r_max, dtype=float), (n,))
    member0 = is_member(m, w, policy, n_member)
    theta = 2 * np.pi * np.arange(directions) / directions
    dirs = np.exp(1j * theta)
    frac = np.geomspace(1e-4, 1.0, n_radii)
    radii = r_max[:, None] * frac[None, :]                       # (n, R)
    pts = w[:, None, None] + radii[:, None, :] * dirs[None, :, None]   # (n, D, R)
    inside = is_member(m, pts, policy, n_member)
    outside = ~inside
    has_flip = outside.any(axis=2)
    first = np.argmax(outside, axis=2)                           # (n, D)
    hi = np.take_along_axis(np.broadcast_to(radii[:, None, :], outside.shape),
                            first[..., None], axis=2)[..., 0]
    lo = np.where(first > 0,
                  np.take_along_axis(np.broadcast_to(radii[:, None, :], outside.shape),
                                     np.maximum(first - 1, 0)[..., None], axis=2)[..., 0],
                  0.0)
    sel = np.nonzero(has_flip)
    blo, bhi = lo[sel], hi[sel]
    bw, bd = w[sel[0]], dirs[sel[1]]
    for _ in range(bisections):
        mid = 0.5 * (blo + bhi)
        ok = is_member(m, bw + mid * bd, policy, n_member)
        blo = np.where(ok, mid, blo)
        bhi = np.where(ok, bhi, mid)
    d = np.broadcast_to(r_max[:, None], (n, directions)).copy()
    d[sel] = 0.5 * (blo + bhi)
    out = d.min(axis=1)
    return np.where(member0, out, 0.0)


def estimate_boundary_distance(f, w, policy: Optional[EscapePolicy] = None,
                               directions: int = 32, r_max: float = 100.0,
                               n_member: int = 200) -> float:
    """dist(w, boundary of the escaping component) by ray bisection."""
    return float(boundary_distances(f, [w], policy, directions, r_max, n_member)[0])


def orbit_with_distances(f, z0, n_max: int, policy: Optional[EscapePolicy] = None,
                         directions: int = 32, r_max0: Optional[float] = None,
                         n_member: int = 200) -> OrbitRecord:
    """Orbit (not stopped at escape) with boundary distances and ratios."""
    return orbits_with_distances(f, [z0], n_max, policy, directions, r_max0, n_member)[0]


def orbits_with_distances(f, seeds, n_max: int, policy: Optional[EscapePolicy] = None,
                          directions: int = 32, r_max0: Optional[float] = None,
                          n_member: int = 200):
    """Orbits of several seeds sharing batched boundary-distance work.

    d_0 is searched up to r_max0 (default 2|w_0| + 20). Later points reuse
    the 1-Lipschitz bound d_n <= d_0 + |w_n - w_0| as their search radius.
    """
    m = as_map(f)
    policy = policy or default_policy(m)
    orbits = [iterate(m, s, n_max, policy, stop_on_escape=False) for s in seeds]
    w0 = np.array([o.points[0] for o in orbits])
    rm0 = 2 * np.abs(w0) + 20 if r_max0 is None else np.full(len(w0), float(r_max0))
    d0 = boundary_distances(m, w0, policy, directions, rm0, n_member)
    chunks, owners, radius = [], [], []
    for k, o in enumerate(orbits):
        pts = o.points[1:len(o.steps)]
        chunks.append(pts)
        owners.append(np.full(len(pts), k))
        radius.append(1.01 * d0[k] + np.abs(pts - o.points[0]) + 1e-12)
    if chunks:
        allp = np.concatenate(chunks)
        own = np.concatenate(owners)
        dn = boundary_distances(m, allp, policy, directions, np.concatenate(radius), n_member)
    out = []
    for k, o in enumerate(orbits):
        dk = np.concatenate([[d0[k]], dn[own == k]]) if len(o.steps) else np.array([d0[k]])
        out.append(o.with_distances(dk[: max(len(o.steps), 1)]))
    return out


# ---------------------------------------------------------------- growth / crossings

@dataclass
class GrowthCheck:
    ok: bool
    worst_margin: float
    margins: dict
    samples: int
    failures: int

    def to_dict(self):
        return asdict(self)


def check_growth_inequality(p: ConstructionParams, sample_count: int = 100000, seed: int = 0,
                            span: float = 40.0) -> GrowthCheck:
    """Sampled check of the growth inequality on the closed blend zone.

    theorem1: Im F(z) > Im z + 2 pi (alpha+m) - 1 > 3 pi and Re F(z) < x0.
    theorem2: Re F(z) < -3 pi M, i.e. the blend zone lands in the
    absorbing half-plane. Overflowing samples fail.
    """
    rng = np.random.default_rng(seed)
    z = sample_interpolation_zone(p, sample_count, rng, span)
    with np.errstate(all="ignore"):
        w = _F_raw(z, p)
    bad = ~np.isfinite(w)
    if p.family is Family.THEOREM1:
        shift = 2 * np.pi * (p.alpha + p.m) - 1
        parts = {
            "im_growth": w.imag - z.imag - shift,
            "above_3pi": z.imag + shift - 3 * np.pi,
            "re_below_x0": p.x0 - w.real,
        }
    else:
        parts = {"re_absorbed": -3 * np.pi * p.M - w.real}
    margins = {}
    fail = np.zeros(z.shape, dtype=bool)
    for k, v in parts.items():
        v = np.where(bad, -np.inf, v)
        margins[k] = float(v.min())
        fail |= ~(v > 0)
    worst = min(margins.values())
    return GrowthCheck(ok=bool(not fail.any()), worst_margin=worst, margins=margins,
                       samples=int(sample_count), failures=int(fail.sum()))


def count_strip_crossings(orbit, p: ConstructionParams) -> int:
    """Number of orbit points lying in the blend zone A, ABAR, B (or CAP)."""
    pts = orbit.points if isinstance(orbit, OrbitRecord) else np.asarray(orbit)
    codes = region_codes(pts, p)
    tags = np.array([int(t) for t in INTERPOLATION_TAGS])
    return int(np.isin(codes, tags).sum())


def sample_w0(p: ConstructionParams, count: int, rng: np.random.Generator, depth: float = 40.0):
    """Random points of W0 = {Re z < x0, Im z > 2 pi}, truncated at ``depth``."""
    x = p.x0 - depth * rng.random(count)
    y = 2 * np.pi + depth * rng.random(count)
    return x + 1j * y


# ---------------------------------------------------------------- classification

@dataclass
class ClassificationVerdict:
    verdict: str
    seeds: list
    seed_depths: list
    tail_ratios: list
    step_bounds: list
    thresholds: dict
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, complex):
                return [v.real, v.imag]
            if isinstance(v, float) and not math.isfinite(v):
                return None
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            if isinstance(v, dict):
                return {k: enc(x) for k, x in v.items()}
            return v
        return enc(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def default_seeds(name: str) -> list:
    """Classification seeds with widely varying depth in each domain."""
    if name == "fatou":
        return [complex(x, y) for x in (5, 10, 20, 40) for y in (0.5, -2.0)]
    if name in ("h1", "F1"):
        return [complex(-R, 0.5) for R in (2, 4, 8, 16, 32, 64, 128, 256)]
    if name in ("h2", "F2"):
        # right half-plane members and far-left points of the same component
        return [3 + 0j, 3 + 0.5j, 4 - 0.3j, 2.6 + 0.05j,
                -3 + 1j, -10 - 2j, -40 + 15j, -150 + 60j]
    raise ValueError(f"no default seeds for {name!r}")


DEFAULT_NMAX = {"fatou": 200, "h1": 60, "F1": 60, "h2": 60, "F2": 60}


def koenig_classify(f, seeds: Optional[Sequence[complex]] = None, n_max: Optional[int] = None,
                    policy: Optional[EscapePolicy] = None, eps: float = 0.05,
                    tail_fraction: float = 0.25, beta_start: int = 5, min_orbit: int = 12,
                    slope_cut: float = -0.5, directions: int = 32,
                    n_member: int = 200) -> ClassificationVerdict:
    """Baker-domain type from König ratios t_n = |w_{n+1}-w_n| / d_n.

    Rule, applied in order:
      * every seed's tail max below eps -> doubly_parabolic;
      * every seed's tail min above eps and log(tail min) falling with
        log(seed depth d_0) at slope <= slope_cut -> simply_parabolic
        (the infimum over seeds tends to 0);
      * beta = min over seeds and n >= beta_start of t_n at least eps
        -> hyperbolic;
      * otherwise, or if an orbit has fewer than min_orbit ratios,
        inconclusive.
    """
    m = f if not isinstance(f, str) else named_map(f)
    m = as_map(m)
    if seeds is None:
        seeds = default_seeds(m.name)
    seeds = [complex(s) for s in seeds]
    n_max = n_max or DEFAULT_NMAX.get(m.name, 200)
    policy = policy or default_policy(m)
    orbits = orbits_with_distances(m, seeds, n_max, policy, directions, None, n_member)
    thresholds = {"eps": eps, "tail_fraction": tail_fraction, "beta_start": beta_start,
                  "min_orbit": min_orbit, "slope_cut": slope_cut, "n_max": n_max,
                  "directions": directions, "n_member": n_member,
                  "policy": asdict(policy)}
    tails, bounds, tmin, tmax, depths, lengths = [], [], [], [], [], []
    beta = math.inf
    short = False
    for o in orbits:
        r = o.ratios
        valid = np.isfinite(r)
        lengths.append(int(valid.sum()))
        depths.append(float(o.dists[0]))
        if valid.sum() < min_orbit or not valid.all():
            short = True
        rv = r[valid]
        k = max(1, int(math.ceil(tail_fraction * len(rv)))) if len(rv) else 0
        tail = rv[-k:] if k else rv
        tails.append(tail.tolist())
        bounds.append(np.stack([o.hyp_lo, o.hyp_hi], axis=1)[valid].tolist())
        tmin.append(float(tail.min()) if len(tail) else math.nan)
        tmax.append(float(tail.max()) if len(tail) else math.nan)
        if len(rv) > beta_start:
            beta = min(beta, float(rv[beta_start:].min()))
    slope = math.nan
    good = [(d, t) for d, t in zip(depths, tmin) if d > 0 and t > 0 and math.isfinite(t)]
    if len(good) >= 2 and len({d for d, _ in good}) >= 2:
        ld = np.log([d for d, _ in good])
        lt = np.log([t for _, t in good])
        slope = float(np.polyfit(ld, lt, 1)[0])
    if short:
        verdict = INCONCLUSIVE
    elif all(t < eps for t in tmax):
        verdict = DOUBLY
    elif all(t > eps for t in tmin) and slope <= slope_cut:
        verdict = SIMPLY
    elif beta >= eps:
        verdict = HYPERBOLIC
    else:
        verdict = INCONCLUSIVE
    evidence = {"tail_min": tmin, "tail_max": tmax, "beta": beta, "depth_slope": slope,
                "ratios_counted": lengths, "terminated": [o.terminated for o in orbits]}
    return ClassificationVerdict(verdict, seeds, depths, tails, bounds, thresholds, evidence)


# ---------------------------------------------------------------- Siegel disk

@dataclass
class SiegelScan:
    r0: float
    stable: bool
    r0_half: float
    radii: list
    passed: list

    def to_dict(self):
        return asdict(self)


def _bounded_radii(p, radii, n_iter, n_angles, bound=1.0, floor=0.25):
    lam = p.multiplier
    th = 2 * np.pi * (np.arange(n_angles) + 0.5) / n_angles
    z = radii[:, None] * np.exp(1j * th)[None, :]
    alive = np.ones(z.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(n_iter):
            z = np.where(alive, lam * z * np.exp(np.where(alive, z, 0)), z)
            a = np.abs(z)
            alive &= (a < bound) & (a > floor * radii[:, None])
    return alive.all(axis=1)


def siegel_scan(p: ConstructionParams, n_iter: int = 1000, radial_grid=64,
                n_angles: int = 64, floor: float = 0.25) -> SiegelScan:
    """Largest sampled r whose circle |z| = r has every sampled orbit of
    g(z) = e^{2 pi i alpha} z e^z inside the annulus floor*r < |z| < 1 for
    ``n_iter`` steps (together with every smaller sampled radius). The
    inner wall rejects parabolic orbits that leave and return to 0.

    The scan is repeated with n_iter/2; ``stable`` means both runs agree
    within 10%. Unstable or zero results signal a non-Siegel multiplier.
    """
    if p.family is not Family.THEOREM1:
        raise ValueError("siegel_scan needs theorem1 params")
    radii = (np.linspace(1.0 / radial_grid, 1.0, radial_grid) if np.ndim(radial_grid) == 0
             else np.asarray(radial_grid, dtype=float))

    def largest(ok):
        if not ok[0]:
            return 0.0
        k = len(ok) if ok.all() else int(np.argmin(ok))
        return float(radii[k - 1])

    full = _bounded_radii(p, radii, n_iter, n_angles, floor=floor)
    half = _bounded_radii(p, radii, max(1, n_iter // 2), n_angles, floor=floor)
    r0, r0h = largest(full), largest(half)
    stable = r0 > 0 and abs(r0 - r0h) <= 0.1 * r0
    return SiegelScan(r0, bool(stable), r0h, radii.tolist(), full.tolist())


__all__ = [
    "EscapePolicy", "default_policy", "escape_times", "is_member",
    "OrbitRecord", "iterate", "hyperbolic_step_bounds",
    "boundary_distances", "estimate_boundary_distance", "orbit_with_distances",
    "orbits_with_distances", "GrowthCheck", "check_growth_inequality",
    "count_strip_crossings", "sample_w0", "ClassificationVerdict", "default_seeds",
    "koenig_classify", "SiegelScan", "siegel_scan",
    "DOUBLY", "SIMPLY", "HYPERBOLIC", "INCONCLUSIVE",
]
