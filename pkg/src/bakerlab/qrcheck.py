"""Sampled certification that the interpolated map F is quasiregular.

On the blend zones F = const + a z + P with a = 1 (theorem1) or 2
(theorem2), so the bounds concern |F_z - a| and |F_zbar|.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .maps import MapOverflowError, as_map, zone_formula, zone_grids
from .params import ConstructionParams, Family

BOUND = 0.25


def _offsets(x, h):
    # realized offsets, so that x +/- offset are exactly the evaluated abscissae
    hp = (x + h) - x
    hm = x - (x - h)
    return hp, hm


def finite_diff_wirtinger(f, z, step: Optional[float] = None):
    """Central-difference estimates of (f_z, f_zbar) at ``z``.

    ``step`` defaults to 1e-5 * max(1, |z|). Raises MapOverflowError if the
    stencil leaves the double range.
    """
    m = as_map(f)
    z = np.asarray(z, dtype=np.complex128)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if step is None:
        h = 1e-5 * np.maximum(1.0, np.abs(z))
    else:
        if not step > 0:
            raise ValueError("step must be positive")
        h = np.full(z.shape, float(step))
    x, y = z.real, z.imag
    hxp, hxm = _offsets(x, h)
    hyp, hym = _offsets(y, h)
    pts = np.stack([
        (x + hxp) + 1j * y, (x - hxm) + 1j * y,
        x + 1j * (y + hyp), x + 1j * (y - hym),
    ])
    w, bad = m.evaluate(pts)
    if np.any(bad):
        raise MapOverflowError(m.name + " stencil", bad.any(axis=0))
    fx = (w[0] - w[1]) / (hxp + hxm)
    fy = (w[2] - w[3]) / (hyp + hym)
    fz = 0.5 * (fx - 1j * fy)
    fzb = 0.5 * (fx + 1j * fy)
    if scalar:
        return complex(fz[0]), complex(fzb[0])
    return fz, fzb


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


@dataclass
class DilatationReport:
    grid: dict
    max_abs_pz: float
    max_abs_pzbar: float
    max_K: float
    bound_satisfied: bool
    margin: float

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def zone_derivative_samples(p: ConstructionParams, grid_density: int, span: float = 40.0):
    """Grid points of every blend zone with the closed-form (F_z - a, F_zbar)."""
    pts, pz, pzb = [], [], []
    for tag, z in zone_grids(p, grid_density, span).items():
        _, dz, dzb = zone_formula(z, p, tag)
        pts.append(z.ravel())
        pz.append((dz - p.linear_coeff).ravel())
        pzb.append(dzb.ravel())
    return np.concatenate(pts), np.concatenate(pz), np.concatenate(pzb)


def verify_interpolation_bounds(p: ConstructionParams, grid_density: int = 200,
                                span: float = 40.0) -> DilatationReport:
    """Maxima of |F_z - a| and |F_zbar| over closed grids of the blend zones.

    Each zone gets a ``grid_density`` x ``grid_density`` grid; the strips are
    truncated ``span`` units beyond the cap. Overflowing samples count as
    violations (the maxima become infinite).
    """
    z, pz, pzb = zone_derivative_samples(p, grid_density, span)
    a_pz, a_pzb = np.abs(pz), np.abs(pzb)
    overflow = int(np.count_nonzero(np.isnan(a_pz) | np.isnan(a_pzb)))
    a_fz = np.abs(pz + p.linear_coeff)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = np.where(a_fz > a_pzb, (a_fz + a_pzb) / (a_fz - a_pzb), np.inf)
    if overflow:
        mx_pz = mx_pzb = mx_K = math.inf
    else:
        mx_pz, mx_pzb, mx_K = float(a_pz.max()), float(a_pzb.max()), float(K.max())
    zones = [t.name for t in zone_grids(p, 2, span)]
    grid = {"density": int(grid_density), "span": float(span), "zones": zones,
            "points": int(z.size), "overflow_points": overflow}
    worst = max(mx_pz, mx_pzb)
    return DilatationReport(grid=grid, max_abs_pz=mx_pz, max_abs_pzbar=mx_pzb, max_K=mx_K,
                            bound_satisfied=bool(worst <= BOUND), margin=BOUND - worst)


def estimate_max_dilatation(p: ConstructionParams, grid_density: int = 200,
                            span: float = 40.0) -> float:
    """Sampled maximum of K = (|F_z|+|F_zbar|)/(|F_z|-|F_zbar|) on the blend zones.

    Off the blend zones F is holomorphic and K = 1.
    """
    return verify_interpolation_bounds(p, grid_density, span).max_K


class SearchExhausted(RuntimeError):
    """No ladder entry passed the checks."""


@dataclass
class SearchTargets:
    margin: float = 0.05
    grid_density: int = 100
    growth_samples: int = 20000
    span: float = 40.0
    max_scale_exp: int = 7      # |x1| or M up to 2**max_scale_exp
    max_L_exp: int = 16         # L up to 2**max_L_exp
    seed: int = 0
    base: Optional[ConstructionParams] = None
    log: list = field(default_factory=list)


def _candidate_passes(p: ConstructionParams, t: SearchTargets) -> bool:
    from .dynamics import check_growth_inequality

    rep = verify_interpolation_bounds(p, t.grid_density, t.span)
    ok = rep.margin >= t.margin
    growth_margin = None
    if ok:
        g = check_growth_inequality(p, t.growth_samples, seed=t.seed, span=t.span)
        growth_margin = g.worst_margin
        ok = g.ok and g.worst_margin >= t.margin
    t.log.append({"params": p.to_dict(), "qr_margin": _jsonable(rep.margin),
                  "growth_margin": growth_margin, "passed": ok})
    return ok


def search_admissible_params(family="theorem1", targets: Optional[SearchTargets] = None
                             ) -> ConstructionParams:
    """Walk the doubling ladder of |x1| (theorem1) or M (theorem2); for each
    rung walk the L ladder 1, 2, 4, ... and return the first parameter set
    whose bound check and growth check both pass with ``targets.margin``.

    Rungs violating the parameter invariants are skipped. Raises
    SearchExhausted when the ladders run out.
    """
    t = targets or SearchTargets()
    fam = Family(family)
    base = t.base or (ConstructionParams.theorem1() if fam is Family.THEOREM1
                      else ConstructionParams.theorem2())
    base = base.with_(family=fam)
    for j in range(t.max_scale_exp + 1):
        scale = 2 ** j
        rung = base.with_(x1=-float(scale)) if fam is Family.THEOREM1 else base.with_(M=scale)
        if rung.with_(L=1.0).issues():
            continue
        for i in range(t.max_L_exp + 1):
            cand = rung.with_(L=float(2 ** i))
            if _candidate_passes(cand, t):
                return cand
    raise SearchExhausted(f"no admissible {fam.value} parameters within the configured ladders")


__all__ = [
    "BOUND", "DilatationReport", "SearchExhausted", "SearchTargets",
    "finite_diff_wirtinger", "zone_derivative_samples", "verify_interpolation_bounds",
    "estimate_max_dilatation", "search_admissible_params",
]
