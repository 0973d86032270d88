"""Closed-form evaluation of the model maps on the surgery regions,
including the piecewise quasiregular map F of each construction.

Scalar or array input is accepted everywhere. Public ``eval_*`` functions
raise :class:`MapOverflowError` when an exponent argument leaves the double
range; :meth:`PiecewiseMap.evaluate` returns the overflow mask instead,
which is what the iteration and rendering layers use.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Optional

import numpy as np

from . import _kernels as K
from .params import ConstructionParams, Family

EXP_LIMIT = K.EXP_LIMIT


class RegionTag(IntEnum):
    OUTSIDE = K.OUTSIDE
    T = K.T
    A = K.A
    ABAR = K.ABAR
    B = K.B
    CAP = K.CAP


INTERPOLATION_TAGS = frozenset({RegionTag.A, RegionTag.ABAR, RegionTag.B, RegionTag.CAP})


class MapOverflowError(OverflowError):
    """An exponent argument exceeded ``EXP_LIMIT`` in real part."""

    def __init__(self, name: str, mask):
        self.mask = mask
        count = int(np.count_nonzero(mask))
        super().__init__(f"{name}: exponent overflow at {count} point(s)")


def _bad(w):
    return np.isnan(w.real) | np.isnan(w.imag)


def _finish(name, w, scalar):
    bad = _bad(w)
    if np.any(bad):
        raise MapOverflowError(name, bad)
    return complex(w) if scalar else w


def _prep(z):
    scalar = np.ndim(z) == 0
    return np.asarray(z, dtype=np.complex128), scalar


def _require(p: ConstructionParams, family: Family):
    if p.family is not family:
        raise ValueError(f"expected {family.value} params, got {p.family.value}")


def _variant(p: ConstructionParams) -> int:
    return 0 if p.k2_variant == "literal" else 1


# ---------------------------------------------------------------- evaluators

def eval_h1(z, p: ConstructionParams):
    """h(z) = 2 pi i (alpha + m) + z + e^z."""
    _require(p, Family.THEOREM1)
    z, s = _prep(z)
    return _finish("h1", K.u_h1(z, p.translation), s)


def eval_k1(z, p: ConstructionParams):
    """k(z) = 2 pi i (alpha + m) + z + exp(e^{-z} - L)."""
    _require(p, Family.THEOREM1)
    z, s = _prep(z)
    return _finish("k1", K.u_k1(z, p.translation, float(p.L)), s)


def eval_g1(z, p: ConstructionParams):
    """Siegel model g(z) = e^{2 pi i alpha} z e^z."""
    _require(p, Family.THEOREM1)
    z, s = _prep(z)
    return _finish("g1", K.u_g1(z, p.multiplier), s)


def eval_h2(z):
    """h(z) = 2 - log 2 + 2z - e^z."""
    z, s = _prep(z)
    return _finish("h2", K.u_h2(z), s)


def eval_k2(z, p: ConstructionParams):
    """k(z) = 2 - log 2 + 2z + exp(e^{-iz} - L) (``rotated`` variant: e^{iz})."""
    _require(p, Family.THEOREM2)
    z, s = _prep(z)
    return _finish("k2", K.u_k2(z, float(p.L), _variant(p)), s)


def eval_g2(z):
    """g(z) = z^2 e^{2-z} / 2, superattracting at 0."""
    z, s = _prep(z)
    return _finish("g2", K.u_g2(z), s)


def eval_fatou(z):
    """Fatou's example z + 1 + e^{-z}."""
    z, s = _prep(z)
    return _finish("fatou", K.u_fatou(z), s)


def deriv_h1(z):
    z, s = _prep(z)
    return _finish("h1'", K.u_h1_d(z), s)


def deriv_k1(z, p: ConstructionParams):
    """k'(z) = 1 - e^{-z} exp(e^{-z} - L)."""
    z, s = _prep(z)
    return _finish("k1'", K.u_k1_d(z, float(p.L)), s)


def deriv_h2(z):
    z, s = _prep(z)
    return _finish("h2'", K.u_h2_d(z), s)


def deriv_k2(z, p: ConstructionParams):
    z, s = _prep(z)
    return _finish("k2'", K.u_k2_d(z, float(p.L), _variant(p)), s)


def deriv_fatou(z):
    z, s = _prep(z)
    return _finish("fatou'", K.u_fatou_d(z), s)


# ---------------------------------------------------------------- regions

def region_codes(z, p: ConstructionParams) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    if p.family is Family.THEOREM1:
        return np.asarray(K.u_region1(z, float(p.x1)))
    return np.asarray(K.u_region2(z, int(p.M)))


def region_of(z, p: ConstructionParams):
    """Region tag of ``z`` (array of ints for array input).

    Shared boundary points go to the first closed set in the order
    T-bar, A-bar/ABAR-bar/B-bar, OUTSIDE.
    """
    codes = region_codes(z, p)
    if codes.ndim == 0:
        return RegionTag(int(codes))
    return codes


def in_interpolation_zone(z, p: ConstructionParams) -> np.ndarray:
    codes = region_codes(z, p)
    return (codes == K.A) | (codes == K.ABAR) | (codes == K.B) | (codes == K.CAP)


# ---------------------------------------------------------------- F

def _F_raw(z, p):
    if p.family is Family.THEOREM1:
        return K.u_F1(z, p.translation, float(p.L), float(p.x1))
    return K.u_F2(z, float(p.L), int(p.M), _variant(p))


def _DF_raw(z, p):
    if p.family is Family.THEOREM1:
        args = (p.translation, float(p.L), float(p.x1))
        return K.u_F1_dz(z, *args), K.u_F1_dzbar(z, *args)
    args = (float(p.L), int(p.M), _variant(p))
    return K.u_F2_dz(z, *args), K.u_F2_dzbar(z, *args)


def zone_formula(z, p: ConstructionParams, tag: RegionTag):
    """Value and Wirtinger derivatives of the formula attached to ``tag``,
    evaluated at ``z`` whatever region ``z`` is in (raw: NaN on overflow)."""
    z = np.asarray(z, dtype=np.complex128)
    t = int(tag)
    if p.family is Family.THEOREM1:
        args = (p.translation, float(p.L), float(p.x1), t)
        return K.u_F1_zone(z, *args), K.u_F1_dz_zone(z, *args), K.u_F1_dzbar_zone(z, *args)
    args = (float(p.L), int(p.M), _variant(p), t)
    return K.u_F2_zone(z, *args), K.u_F2_dz_zone(z, *args), K.u_F2_dzbar_zone(z, *args)


def zone_grids(p: ConstructionParams, n: int, span: float = 40.0) -> dict:
    """Closed n-by-n sample grids of each interpolation zone (unbounded strips
    truncated ``span`` units away from the cap)."""
    two_pi = 2 * np.pi
    g = {}
    if p.family is Family.THEOREM1:
        xs = np.linspace(p.x1 - span, p.x1, n)
        ys = np.linspace(np.pi, two_pi, n)
        X, Y = np.meshgrid(xs, ys)
        g[RegionTag.A] = X + 1j * Y
        g[RegionTag.ABAR] = X - 1j * Y
        r = np.linspace(np.pi, two_pi, n)
        phi = np.linspace(-np.pi / 2, np.pi / 2, n)
        R, PH = np.meshgrid(r, phi)
        g[RegionTag.B] = p.x1 + R * np.exp(1j * PH)
    else:
        cx = -two_pi * p.M
        ys = np.linspace(-two_pi - span, -two_pi, n)
        off = np.linspace(np.pi, two_pi, n)
        O, Y = np.meshgrid(off, ys)
        g[RegionTag.A] = (cx - O) + 1j * Y
        g[RegionTag.ABAR] = (cx + O) + 1j * Y
        r = np.linspace(np.pi, two_pi, n)
        th = np.linspace(0.0, np.pi, n)
        R, TH = np.meshgrid(r, th)
        g[RegionTag.CAP] = p.cap_center + R * np.exp(1j * TH)
    return g


def sample_interpolation_zone(p: ConstructionParams, count: int, rng: np.random.Generator,
                              span: float = 40.0, edge_fraction: float = 0.1) -> np.ndarray:
    """Uniform random points of the closed blend zone S-bar minus T,
    with the unbounded strips truncated at distance ``span``.

    A share ``edge_fraction`` of the points is snapped onto the inner or
    outer edge, where the weights are 0 or 1.
    """
    two_pi = 2 * np.pi
    strip_area = span * np.pi
    cap_area = 0.5 * np.pi * (two_pi ** 2 - np.pi ** 2)
    probs = np.array([strip_area, strip_area, cap_area])
    which = rng.choice(3, size=count, p=probs / probs.sum())
    u = rng.random(count)
    v = rng.random(count)
    # area-uniform radius on the annulus
    snap = rng.random(count) < edge_fraction
    side = (rng.random(count) < 0.5).astype(float)
    # strips: v runs across the strip; cap: u runs along the radius
    v = np.where(snap & (which < 2), side, v)
    u = np.where(snap & (which == 2), side, u)
    rad = np.sqrt(np.pi ** 2 + u * (two_pi ** 2 - np.pi ** 2))
    out = np.empty(count, dtype=np.complex128)
    if p.family is Family.THEOREM1:
        along = p.x1 - span * u
        across = np.pi + np.pi * v
        out = np.where(which == 0, along + 1j * across, out)
        out = np.where(which == 1, along - 1j * across, out)
        out = np.where(which == 2, p.x1 + rad * np.exp(1j * (np.pi * v - np.pi / 2)), out)
    else:
        cx = -two_pi * p.M
        along = -two_pi - span * u
        across = np.pi + np.pi * v
        out = np.where(which == 0, (cx - across) + 1j * along, out)
        out = np.where(which == 1, (cx + across) + 1j * along, out)
        out = np.where(which == 2, p.cap_center + rad * np.exp(1j * np.pi * v), out)
    return out


def eval_F(z, p: ConstructionParams):
    """The quasiregular map F: h off S-bar, k on T-bar, affine blend between."""
    z, s = _prep(z)
    return _finish("F", _F_raw(z, p), s)


def eval_F_derivatives(z, p: ConstructionParams):
    """Closed-form Wirtinger derivatives (F_z, F_zbar)."""
    z, s = _prep(z)
    dz, dzb = _DF_raw(z, p)
    return _finish("F_z", dz, s), _finish("F_zbar", dzb, s)


def perturbation(z, p: ConstructionParams):
    """F(z) - translation - linear_coeff * z; the interpolant on the blend zones."""
    z, s = _prep(z)
    w = _F_raw(z, p) - p.translation - p.linear_coeff * z
    return _finish("perturbation", w, s)


def interpolant_P(z, p: ConstructionParams):
    """Closed form of the blend term on the horizontal strips (theorem1).

    Upper strip: (y-pi)/pi e^x + (2pi-y)/pi exp(-e^{-x} - L); the lower strip
    is the mirror image in y.
    """
    _require(p, Family.THEOREM1)
    z, s = _prep(z)
    x, y = z.real, np.abs(z.imag)
    with np.errstate(over="ignore", under="ignore"):
        w = (y - np.pi) / np.pi * np.exp(x) + (2 * np.pi - y) / np.pi * np.exp(-np.exp(-x) - p.L)
    w = np.asarray(w, dtype=np.complex128)
    return complex(w) if s else w


def interpolant_Q(z, p: ConstructionParams):
    """Closed form of the blend term on the cap B (theorem1).

    With z = x1 + r e^{i phi}:
    (r-pi)/pi exp(x1 + 2 pi e^{i phi}) + (2pi-r)/pi exp(exp(-x1 - pi e^{i phi}) - L).
    """
    _require(p, Family.THEOREM1)
    z, s = _prep(z)
    d = z - p.x1
    r = np.abs(d)
    e = d / r
    with np.errstate(over="ignore", invalid="ignore"):
        inner = np.exp(-p.x1 - np.pi * e)
        arg = inner - p.L
        big = arg.real > EXP_LIMIT
        pert = np.exp(np.where(big, 0, arg))
        pert = np.where(big, np.nan, pert)
        w = (r - np.pi) / np.pi * np.exp(p.x1 + 2 * np.pi * e) + (2 * np.pi - r) / np.pi * pert
    return _finish("Q", np.asarray(w, dtype=np.complex128), s)


# ---------------------------------------------------------------- map objects

@dataclass(frozen=True)
class PiecewiseMap:
    """A named complex map with an array evaluator and optional closed-form
    derivative.

    ``raw`` maps a complex array to a complex array with NaN marking overflow.
    ``wirtinger`` (if given) returns (f_z, f_zbar) arrays.
    """

    name: str
    raw: Callable[[np.ndarray], np.ndarray]
    wirtinger: Optional[Callable[[np.ndarray], tuple]] = None
    params: Optional[ConstructionParams] = None
    kernel: Optional[tuple] = field(default=None, compare=False)

    def evaluate(self, z):
        z = np.asarray(z, dtype=np.complex128)
        with np.errstate(all="ignore"):
            w = np.asarray(self.raw(z), dtype=np.complex128)
        bad = ~np.isfinite(w)
        if np.any(bad):
            w = np.where(bad, complex(np.nan, np.nan), w)
        return w, bad

    def __call__(self, z):
        z, s = _prep(z)
        w, bad = self.evaluate(z)
        if np.any(bad):
            raise MapOverflowError(self.name, bad)
        return complex(w) if s else w

    def derivative(self, z):
        """Holomorphic derivative (f_z); analytic maps only give meaningful values."""
        if self.wirtinger is None:
            raise NotImplementedError(f"{self.name} has no closed-form derivative")
        z, s = _prep(z)
        dz, _ = self.wirtinger(z)
        return _finish(self.name + "'", np.asarray(dz, dtype=np.complex128), s)

    def wirtinger_pair(self, z):
        if self.wirtinger is None:
            raise NotImplementedError(f"{self.name} has no closed-form derivative")
        z, s = _prep(z)
        dz, dzb = self.wirtinger(z)
        return _finish(self.name + "_z", dz, s), _finish(self.name + "_zbar", dzb, s)


def as_map(fn, name: str = "custom") -> PiecewiseMap:
    """Wrap a plain vectorized callable; non-finite outputs count as overflow."""
    if isinstance(fn, PiecewiseMap):
        return fn
    return PiecewiseMap(name=name, raw=fn)


def _analytic(df):
    return lambda z: (df(z), np.zeros_like(z))


MAP_NAMES = ("fatou", "h1", "k1", "g1", "h2", "k2", "g2", "F")


def named_map(name: str, p: Optional[ConstructionParams] = None) -> PiecewiseMap:
    """Build one of the maps of the workbench.

    ``fatou``, ``h2`` and ``g2`` need no parameters; ``h1``, ``k1``, ``g1``
    need theorem1 params; ``k2`` theorem2 params; ``F`` either family.
    Kernel ids let the compiled renderer run the same arithmetic.
    """
    if name == "fatou":
        return PiecewiseMap("fatou", K.u_fatou, _analytic(K.u_fatou_d), None, ("fatou",))
    if name == "h2":
        return PiecewiseMap("h2", K.u_h2, _analytic(K.u_h2_d), None, ("h2",))
    if name == "g2":
        return PiecewiseMap("g2", K.u_g2, None, None, ("g2",))
    if p is None:
        p = ConstructionParams.theorem2() if name == "k2" else ConstructionParams.theorem1()
    if name == "h1":
        _require(p, Family.THEOREM1)
        c = p.translation
        return PiecewiseMap("h1", lambda z: K.u_h1(z, c), _analytic(K.u_h1_d), p, ("h1", c))
    if name == "k1":
        _require(p, Family.THEOREM1)
        c, L = p.translation, float(p.L)
        return PiecewiseMap("k1", lambda z: K.u_k1(z, c, L),
                            _analytic(lambda z: K.u_k1_d(z, L)), p, ("k1", c, L))
    if name == "g1":
        _require(p, Family.THEOREM1)
        lam = p.multiplier
        return PiecewiseMap("g1", lambda z: K.u_g1(z, lam), None, p, ("g1", lam))
    if name == "k2":
        _require(p, Family.THEOREM2)
        L, v = float(p.L), _variant(p)
        return PiecewiseMap("k2", lambda z: K.u_k2(z, L, v),
                            _analytic(lambda z: K.u_k2_d(z, L, v)), p, ("k2", L, v))
    if name == "F":
        if p.family is Family.THEOREM1:
            args = (p.translation, float(p.L), float(p.x1))
            return PiecewiseMap("F1", lambda z: K.u_F1(z, *args),
                                lambda z: (K.u_F1_dz(z, *args), K.u_F1_dzbar(z, *args)),
                                p, ("F1",) + args)
        args = (float(p.L), int(p.M), _variant(p))
        return PiecewiseMap("F2", lambda z: K.u_F2(z, *args),
                            lambda z: (K.u_F2_dz(z, *args), K.u_F2_dzbar(z, *args)),
                            p, ("F2",) + args)
    raise ValueError(f"unknown map {name!r}; choose from {', '.join(MAP_NAMES)}")


__all__ = [
    "RegionTag", "MapOverflowError", "PiecewiseMap", "as_map", "named_map",
    "eval_h1", "eval_k1", "eval_g1", "eval_h2", "eval_k2", "eval_g2", "eval_fatou",
    "deriv_h1", "deriv_k1", "deriv_h2", "deriv_k2", "deriv_fatou",
    "region_of", "region_codes", "in_interpolation_zone",
    "eval_F", "eval_F_derivatives", "zone_formula", "zone_grids", "sample_interpolation_zone", "perturbation", "interpolant_P", "interpolant_Q",
    "INTERPOLATION_TAGS",
]
