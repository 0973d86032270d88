"""Scalar numba kernels for every map of both constructions.

All kernels return ``nan+nanj`` as soon as an exponent argument has real
part above ``EXP_LIMIT``; the array layer in :mod:`bakerlab.maps` turns
that sentinel into an explicit overflow signal. Region codes follow
:class:`bakerlab.maps.RegionTag`.
"""
import cmath
import math

import numba as nb

EXP_LIMIT = 700.0
TWO_PI = 2.0 * math.pi
PI = math.pi
LOG2 = math.log(2.0)
NAN_C = complex(math.nan, math.nan)

OUTSIDE, T, A, ABAR, B, CAP = 0, 1, 2, 3, 4, 5

jit = nb.njit(cache=True, fastmath=False)


@jit
def gexp(w):
    if w.real > EXP_LIMIT or w.real != w.real:
        return NAN_C
    return cmath.exp(w)


@jit
def is_bad(w):
    return w.real != w.real or w.imag != w.imag


# ---------------------------------------------------------------- model maps

@jit
def fatou(z):
    e = gexp(-z)
    if is_bad(e):
        return NAN_C
    return z + 1.0 + e


@jit
def fatou_d(z):
    e = gexp(-z)
    if is_bad(e):
        return NAN_C
    return 1.0 - e


@jit
def h1(z, c):
    e = gexp(z)
    if is_bad(e):
        return NAN_C
    return c + z + e


@jit
def h1_d(z):
    e = gexp(z)
    if is_bad(e):
        return NAN_C
    return 1.0 + e


@jit
def k1_pert(z, L):
    u = gexp(-z)
    if is_bad(u):
        return NAN_C
    return gexp(u - L)


@jit
def k1(z, c, L):
    p = k1_pert(z, L)
    if is_bad(p):
        return NAN_C
    return c + z + p


@jit
def k1_d(z, L):
    u = gexp(-z)
    if is_bad(u):
        return NAN_C
    p = gexp(u - L)
    if is_bad(p):
        return NAN_C
    return 1.0 - u * p


@jit
def g1(z, lam):
    e = gexp(z)
    if is_bad(e):
        return NAN_C
    return lam * z * e


@jit
def h2(z):
    e = gexp(z)
    if is_bad(e):
        return NAN_C
    return 2.0 - LOG2 + 2.0 * z - e


@jit
def h2_d(z):
    e = gexp(z)
    if is_bad(e):
        return NAN_C
    return 2.0 - e


@jit
def k2_inner(z, variant):
    # literal: e^{-iz}; rotated: e^{iz}
    if variant == 0:
        return gexp(-1j * z)
    return gexp(1j * z)


@jit
def k2(z, L, variant):
    u = k2_inner(z, variant)
    if is_bad(u):
        return NAN_C
    p = gexp(u - L)
    if is_bad(p):
        return NAN_C
    return 2.0 - LOG2 + 2.0 * z + p


@jit
def k2_d(z, L, variant):
    u = k2_inner(z, variant)
    if is_bad(u):
        return NAN_C
    p = gexp(u - L)
    if is_bad(p):
        return NAN_C
    du = -1j * u if variant == 0 else 1j * u
    return 2.0 + du * p


@jit
def g2(z):
    e = gexp(2.0 - z)
    if is_bad(e):
        return NAN_C
    return 0.5 * z * z * e


# ---------------------------------------------------------------- theorem1

@jit
def region1(z, x1):
    x = z.real
    y = z.imag
    dx = x - x1
    r2 = dx * dx + y * y
    if (x <= x1 and abs(y) <= PI) or r2 <= PI * PI:
        return T
    if x <= x1 and PI <= y <= TWO_PI:
        return A
    if x <= x1 and -TWO_PI <= y <= -PI:
        return ABAR
    if x >= x1 and r2 <= TWO_PI * TWO_PI:
        return B
    return OUTSIDE


@jit
def blend(w_outer, v_outer, v_inner):
    # convex combination that tolerates an overflowed endpoint carrying weight 0
    if w_outer == 1.0:
        return v_outer
    if w_outer == 0.0:
        return v_inner
    return w_outer * v_outer + (1.0 - w_outer) * v_inner


@jit
def F1(z, c, L, x1):
    return F1_zone(z, c, L, x1, region1(z, x1))


@jit
def F1_zone(z, c, L, x1, reg):
    if reg == OUTSIDE:
        return h1(z, c)
    if reg == T:
        return k1(z, c, L)
    x = z.real
    y = z.imag
    if reg == A:
        w = (y - PI) / PI
        return blend(w, h1(complex(x, TWO_PI), c), k1(complex(x, PI), c, L))
    if reg == ABAR:
        w = (-y - PI) / PI
        return blend(w, h1(complex(x, -TWO_PI), c), k1(complex(x, -PI), c, L))
    d = z - x1
    r = abs(d)
    e = d / r
    w = (r - PI) / PI
    return blend(w, h1(x1 + TWO_PI * e, c), k1(x1 + PI * e, c, L))


@jit
def wirtinger_from_xy(fx, fy):
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


@jit
def wirtinger_from_polar(fr, fphi, r, e):
    # e = e^{i phi}
    dz = 0.5 / e * (fr - 1j * fphi / r)
    dzb = 0.5 * e * (fr + 1j * fphi / r)
    return dz, dzb


@jit
def F1_wirtinger(z, c, L, x1):
    return F1_wirtinger_zone(z, c, L, x1, region1(z, x1))


@jit
def F1_wirtinger_zone(z, c, L, x1, reg):
    if reg == OUTSIDE:
        return h1_d(z), 0j
    if reg == T:
        return k1_d(z, L), 0j
    x = z.real
    y = z.imag
    if reg == A or reg == ABAR:
        s = 1.0 if reg == A else -1.0
        zo = complex(x, s * TWO_PI)
        zi = complex(x, s * PI)
        w = (s * y - PI) / PI
        fx = w * h1_d(zo) + (1.0 - w) * k1_d(zi, L)
        fy = s * (h1(zo, c) - k1(zi, c, L)) / PI
        return wirtinger_from_xy(fx, fy)
    d = z - x1
    r = abs(d)
    e = d / r
    zo = x1 + TWO_PI * e
    zi = x1 + PI * e
    w = (r - PI) / PI
    fr = (h1(zo, c) - k1(zi, c, L)) / PI
    fphi = w * h1_d(zo) * (1j * TWO_PI * e) + (1.0 - w) * k1_d(zi, L) * (1j * PI * e)
    return wirtinger_from_polar(fr, fphi, r, e)


# ---------------------------------------------------------------- theorem2

@jit
def region2(z, M):
    cx = -TWO_PI * M
    cy = -TWO_PI
    X = z.real - cx
    Y = z.imag
    dy = Y - cy
    r2 = X * X + dy * dy
    if (abs(X) <= PI and Y <= cy) or r2 <= PI * PI:
        return T
    if Y <= cy and -TWO_PI <= X <= -PI:
        return A
    if Y <= cy and PI <= X <= TWO_PI:
        return ABAR
    if Y >= cy and r2 <= TWO_PI * TWO_PI:
        return CAP
    return OUTSIDE


@jit
def F2(z, L, M, variant):
    return F2_zone(z, L, M, variant, region2(z, M))


@jit
def F2_zone(z, L, M, variant, reg):
    if reg == OUTSIDE:
        return h2(z)
    if reg == T:
        return k2(z, L, variant)
    cx = -TWO_PI * M
    Y = z.imag
    if reg == A or reg == ABAR:
        s = -1.0 if reg == A else 1.0
        w = (s * (z.real - cx) - PI) / PI
        zo = complex(cx + s * TWO_PI, Y)
        zi = complex(cx + s * PI, Y)
        return blend(w, h2(zo), k2(zi, L, variant))
    cen = complex(cx, -TWO_PI)
    d = z - cen
    r = abs(d)
    e = d / r
    w = (r - PI) / PI
    return blend(w, h2(cen + TWO_PI * e), k2(cen + PI * e, L, variant))


@jit
def F2_wirtinger(z, L, M, variant):
    return F2_wirtinger_zone(z, L, M, variant, region2(z, M))


@jit
def F2_wirtinger_zone(z, L, M, variant, reg):
    if reg == OUTSIDE:
        return h2_d(z), 0j
    if reg == T:
        return k2_d(z, L, variant), 0j
    cx = -TWO_PI * M
    Y = z.imag
    if reg == A or reg == ABAR:
        s = -1.0 if reg == A else 1.0
        w = (s * (z.real - cx) - PI) / PI
        zo = complex(cx + s * TWO_PI, Y)
        zi = complex(cx + s * PI, Y)
        fx = s * (h2(zo) - k2(zi, L, variant)) / PI
        fy = 1j * (w * h2_d(zo) + (1.0 - w) * k2_d(zi, L, variant))
        return wirtinger_from_xy(fx, fy)
    cen = complex(cx, -TWO_PI)
    d = z - cen
    r = abs(d)
    e = d / r
    zo = cen + TWO_PI * e
    zi = cen + PI * e
    w = (r - PI) / PI
    fr = (h2(zo) - k2(zi, L, variant)) / PI
    fphi = w * h2_d(zo) * (1j * TWO_PI * e) + (1.0 - w) * k2_d(zi, L, variant) * (1j * PI * e)
    return wirtinger_from_polar(fr, fphi, r, e)


# ---------------------------------------------------------------- ufuncs

vec = nb.vectorize(cache=True)


@vec
def u_fatou(z):
    return fatou(z)


@vec
def u_fatou_d(z):
    return fatou_d(z)


@vec
def u_h1(z, c):
    return h1(z, c)


@vec
def u_h1_d(z):
    return h1_d(z)


@vec
def u_k1(z, c, L):
    return k1(z, c, L)


@vec
def u_k1_d(z, L):
    return k1_d(z, L)


@vec
def u_g1(z, lam):
    return g1(z, lam)


@vec
def u_h2(z):
    return h2(z)


@vec
def u_h2_d(z):
    return h2_d(z)


@vec
def u_k2(z, L, variant):
    return k2(z, L, variant)


@vec
def u_k2_d(z, L, variant):
    return k2_d(z, L, variant)


@vec
def u_g2(z):
    return g2(z)


@vec
def u_region1(z, x1):
    return region1(z, x1)


@vec
def u_region2(z, M):
    return region2(z, M)


@vec
def u_F1(z, c, L, x1):
    return F1(z, c, L, x1)


@vec
def u_F1_dz(z, c, L, x1):
    return F1_wirtinger(z, c, L, x1)[0]


@vec
def u_F1_dzbar(z, c, L, x1):
    return F1_wirtinger(z, c, L, x1)[1]


@vec
def u_F2(z, L, M, variant):
    return F2(z, L, M, variant)


@vec
def u_F2_dz(z, L, M, variant):
    return F2_wirtinger(z, L, M, variant)[0]


@vec
def u_F2_dzbar(z, L, M, variant):
    return F2_wirtinger(z, L, M, variant)[1]


@vec
def u_F1_zone(z, c, L, x1, reg):
    return F1_zone(z, c, L, x1, reg)


@vec
def u_F1_dz_zone(z, c, L, x1, reg):
    return F1_wirtinger_zone(z, c, L, x1, reg)[0]


@vec
def u_F1_dzbar_zone(z, c, L, x1, reg):
    return F1_wirtinger_zone(z, c, L, x1, reg)[1]


@vec
def u_F2_zone(z, L, M, variant, reg):
    return F2_zone(z, L, M, variant, reg)


@vec
def u_F2_dz_zone(z, L, M, variant, reg):
    return F2_wirtinger_zone(z, L, M, variant, reg)[0]


@vec
def u_F2_dzbar_zone(z, L, M, variant, reg):
    return F2_wirtinger_zone(z, L, M, variant, reg)[1]
