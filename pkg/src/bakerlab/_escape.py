"""Compiled escape-time loop shared by the dynamics and render layers.

A map is identified by a small integer id plus fixed parameter slots
(complex ``c``, floats ``a`` and ``b``, int ``i``); see :func:`kernel_args`.
"""
import math

import numba as nb
import numpy as np

from . import _kernels as K

FAMILY_IDS = {"fatou": 0, "h1": 1, "k1": 2, "g1": 3, "h2": 4, "k2": 5, "g2": 6, "F1": 7, "F2": 8}
DIRECTIONS = {"imag": 0, "real": 1, "-real": 2, "modulus": 3}

BOUNDED = -1
OVERFLOW = -2


def kernel_args(kernel: tuple):
    """Translate a PiecewiseMap kernel tuple into (fid, c, a, b, i)."""
    name, *rest = kernel
    fid = FAMILY_IDS[name]
    c, a, b, i = 0j, 0.0, 0.0, 0
    if name in ("h1", "g1"):
        c = complex(rest[0])
    elif name == "k1":
        c, a = complex(rest[0]), float(rest[1])
    elif name == "k2":
        a, i = float(rest[0]), int(rest[1])
    elif name == "F1":
        c, a, b = complex(rest[0]), float(rest[1]), float(rest[2])
    elif name == "F2":
        a, b, i = float(rest[0]), float(rest[1]), int(rest[2])
    return fid, c, a, b, i


@K.jit
def apply_map(fid, z, c, a, b, i):
    if fid == 0:
        return K.fatou(z)
    if fid == 1:
        return K.h1(z, c)
    if fid == 2:
        return K.k1(z, c, a)
    if fid == 3:
        return K.g1(z, c)
    if fid == 4:
        return K.h2(z)
    if fid == 5:
        return K.k2(z, a, i)
    if fid == 6:
        return K.g2(z)
    if fid == 7:
        return K.F1(z, c, a, b)
    return K.F2(z, a, int(b), i)


@K.jit
def exp_dir(a):
    # unit phase of exp(a) when it overflows, 0 when it does not or is unknown
    if a.real > K.EXP_LIMIT and math.isfinite(a.imag):
        return complex(math.cos(a.imag), math.sin(a.imag))
    return 0j


@K.jit
def _nested_dir(u, L):
    # phase of exp(u - L) given a finite inner value u
    if K.is_bad(u):
        return 0j
    return exp_dir(u - L)


@K.jit
def _blend_dir(w, d_outer, bad_outer, d_inner, bad_inner):
    # only an overflowing endpoint with positive weight decides; two at once are unknown
    if bad_outer and bad_inner:
        return 0j
    if bad_outer:
        return d_outer if w > 0.0 else 0j
    if bad_inner:
        return d_inner if w < 1.0 else 0j
    return 0j


@K.jit
def _F1_dir(z, c, L, x1):
    reg = K.region1(z, x1)
    if reg == K.OUTSIDE:
        return exp_dir(z)
    if reg == K.T:
        return _nested_dir(K.gexp(-z), L)
    if reg == K.A or reg == K.ABAR:
        s = 1.0 if reg == K.A else -1.0
        zo = complex(z.real, s * K.TWO_PI)
        zi = complex(z.real, s * K.PI)
        w = (s * z.imag - K.PI) / K.PI
    else:
        d = z - x1
        e = d / abs(d)
        zo = x1 + K.TWO_PI * e
        zi = x1 + K.PI * e
        w = (abs(d) - K.PI) / K.PI
    return _blend_dir(w, exp_dir(zo), K.is_bad(K.h1(zo, c)),
                      _nested_dir(K.gexp(-zi), L), K.is_bad(K.k1(zi, c, L)))


@K.jit
def _F2_dir(z, L, M, variant):
    reg = K.region2(z, M)
    if reg == K.OUTSIDE:
        return -exp_dir(z)
    if reg == K.T:
        return _nested_dir(K.k2_inner(z, variant), L)
    cx = -K.TWO_PI * M
    if reg == K.A or reg == K.ABAR:
        s = -1.0 if reg == K.A else 1.0
        zo = complex(cx + s * K.TWO_PI, z.imag)
        zi = complex(cx + s * K.PI, z.imag)
        w = (s * (z.real - cx) - K.PI) / K.PI
    else:
        cen = complex(cx, -K.TWO_PI)
        d = z - cen
        e = d / abs(d)
        zo = cen + K.TWO_PI * e
        zi = cen + K.PI * e
        w = (abs(d) - K.PI) / K.PI
    return _blend_dir(w, -exp_dir(zo), K.is_bad(K.h2(zo)),
                      _nested_dir(K.k2_inner(zi, variant), L), K.is_bad(K.k2(zi, L, variant)))


@K.jit
def overflow_dir(fid, z, c, a, b, i):
    """Unit direction of the term that overflowed in f(z), or 0 if unknown.

    Beyond the double range the image is dominated by C exp(a) with a known
    phase whenever the inner quantities are finite.
    """
    if fid == 0:
        return exp_dir(-z)
    if fid == 1:
        return exp_dir(z)
    if fid == 2:
        return _nested_dir(K.gexp(-z), a)
    if fid == 3:
        d = exp_dir(z)
        t = c * z
        return d * t / abs(t) if abs(t) > 0 else 0j
    if fid == 4:
        return -exp_dir(z)
    if fid == 5:
        return _nested_dir(K.k2_inner(z, i), a)
    if fid == 6:
        d = exp_dir(2.0 - z)
        t = z * z
        return d * t / abs(t) if abs(t) > 0 else 0j
    if fid == 7:
        return _F1_dir(z, c, a, b)
    return _F2_dir(z, a, int(b), i)


@K.jit
def overflow_escapes(direction, d):
    """Overflow toward the escape direction counts as escape."""
    if d == 0j:
        return False
    return coordinate(direction, d) > 0.0


@nb.njit(cache=True)
def overflow_escapes_array(z, fid, c, a, b, i, direction):
    out = np.empty(z.size, dtype=np.bool_)
    for k in range(z.size):
        out[k] = overflow_escapes(direction, overflow_dir(fid, z[k], c, a, b, i))
    return out


@K.jit
def coordinate(direction, w):
    if direction == 0:
        return w.imag
    if direction == 1:
        return w.real
    if direction == 2:
        return -w.real
    return abs(w)


@K.jit
def escape_one(z, fid, c, a, b, i, n_max, direction, threshold, consecutive, cap):
    prev = coordinate(direction, z)
    run = 0
    for n in range(1, n_max + 1):
        w = apply_map(fid, z, c, a, b, i)
        if K.is_bad(w) or math.isinf(w.real) or math.isinf(w.imag):
            if prev > threshold or overflow_escapes(direction, overflow_dir(fid, z, c, a, b, i)):
                return n
            return OVERFLOW
        cur = coordinate(direction, w)
        run = run + 1 if cur > prev else 0
        if cur > threshold and run >= consecutive:
            return n
        if abs(w) > cap:
            return n if cur > threshold else OVERFLOW
        prev = cur
        z = w
    return BOUNDED


def _codes_impl(z0, fid, c, a, b, i, n_max, direction, threshold, consecutive, cap):
    out = np.empty(z0.size, dtype=np.int64)
    for k in nb.prange(z0.size):
        out[k] = escape_one(z0[k], fid, c, a, b, i, n_max, direction, threshold, consecutive, cap)
    return out


codes_parallel = nb.njit(parallel=True, cache=True)(_codes_impl)
codes_serial = nb.njit(cache=True)(_codes_impl)
