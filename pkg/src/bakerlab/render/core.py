"""Escape-time rasters of the workbench maps."""
from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .. import _escape as E
from ..dynamics import EscapePolicy, _escape_times_numpy, default_policy
from ..maps import as_map, named_map
from ..params import ConstructionParams, Family
from .ppm import PALETTE_SHA256, colorize, encode_ppm


@dataclass(frozen=True)
class GridSpec:
    center: complex
    width: float
    height: float
    px_w: int
    px_h: int

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("grid extents must be positive")
        if self.px_w < 1 or self.px_h < 1:
            raise ValueError("pixel counts must be positive")
        aspect = (self.width / self.px_w) / (self.height / self.px_h)
        if abs(aspect - 1) > 0.01:
            raise ValueError(f"pixel aspect {aspect:.4f} differs from 1 by more than 1%")

    @classmethod
    def from_box(cls, x0, x1, y0, y1, px_w, px_h=None):
        if px_h is None:
            px_h = int(round(px_w * (y1 - y0) / (x1 - x0)))
        return cls(complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)), x1 - x0, y1 - y0, px_w, px_h)

    def pixel_centers(self) -> np.ndarray:
        """Complex pixel centers, row 0 at the top."""
        c = complex(self.center)
        xs = c.real - 0.5 * self.width + (np.arange(self.px_w) + 0.5) * (self.width / self.px_w)
        ys = c.imag + 0.5 * self.height - (np.arange(self.px_h) + 0.5) * (self.height / self.px_h)
        return xs[None, :] + 1j * ys[:, None]

    def scaled(self, factor: int) -> "GridSpec":
        return GridSpec(self.center, self.width, self.height, self.px_w * factor,
                        self.px_h * factor)

    def to_dict(self):
        c = complex(self.center)
        return {"center": [c.real, c.imag], "width": self.width, "height": self.height,
                "px_w": self.px_w, "px_h": self.px_h}


@dataclass
class RasterImage:
    codes: np.ndarray
    grid: GridSpec
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.codes.shape != (self.grid.px_h, self.grid.px_w):
            raise ValueError("code array does not match the grid")

    @property
    def escaped(self):
        return self.codes > 0

    @property
    def bounded(self):
        return self.codes == E.BOUNDED

    def classes(self) -> np.ndarray:
        """0 escaped, 1 bounded, 2 overflow."""
        return np.where(self.codes > 0, 0, np.where(self.codes == E.BOUNDED, 1, 2))

    def rgb(self) -> np.ndarray:
        return colorize(self.codes)

    def ppm_bytes(self) -> bytes:
        return encode_ppm(self.rgb())

    def sidecar(self) -> dict:
        from .. import __version__
        data = self.ppm_bytes()
        return {"grid": self.grid.to_dict(), "meta": self.meta, "palette_sha256": PALETTE_SHA256,
                "image_sha256": hashlib.sha256(data).hexdigest(), "format": "P6",
                "version": __version__}

    def write(self, path, sidecar: bool = True):
        """Write ``path`` (PPM) and, if asked, ``path`` with .json suffix."""
        data = self.ppm_bytes()
        with open(path, "wb") as fh:
            fh.write(data)
        if sidecar:
            side = os.path.splitext(str(path))[0] + ".json"
            with open(side, "w") as fh:
                json.dump(self.sidecar(), fh, sort_keys=True, indent=2)
                fh.write("\n")
        return path


def set_threads(n: Optional[int]):
    if n:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def _codes(m, z, n_max, policy, parallel, threads):
    flat = np.ascontiguousarray(z.ravel())
    if m.kernel is not None:
        set_threads(threads)
        fn = E.codes_parallel if parallel else E.codes_serial
        return fn(flat, *E.kernel_args(m.kernel), int(n_max), *policy.args())
    if not parallel:
        return _escape_times_numpy(m, flat, int(n_max), policy)
    # generic callables: disjoint row chunks on a thread pool
    workers = threads or os.cpu_count() or 1
    chunks = np.array_split(np.arange(flat.size), max(1, workers))
    out = np.empty(flat.size, dtype=np.int64)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futs = [(c, ex.submit(_escape_times_numpy, m, flat[c], int(n_max), policy))
                for c in chunks if c.size]
        for c, fu in futs:
            out[c] = fu.result()
    return out


def render_escape(f, grid: GridSpec, n_max: int = 200, policy: Optional[EscapePolicy] = None,
                  parallel: bool = True, threads: Optional[int] = None) -> RasterImage:
    """Escape-step raster: code n if the pixel escaped at step n, -1 if
    bounded for n_max steps, -2 on overflow."""
    m = named_map(f) if isinstance(f, str) else as_map(f)
    policy = policy or default_policy(m)
    z = grid.pixel_centers()
    codes = _codes(m, z, n_max, policy, parallel, threads).reshape(z.shape)
    meta = {"map": m.name, "n_max": int(n_max),
            "policy": {"direction": policy.direction, "threshold": policy.threshold,
                       "consecutive": policy.consecutive, "modulus_cap": policy.modulus_cap},
            "params": m.params.to_dict() if m.params is not None else None}
    return RasterImage(codes, grid, meta)


SIEGEL_POLICY = EscapePolicy(direction="modulus", threshold=2.0, consecutive=0)


def render_siegel(p: ConstructionParams, grid: GridSpec, n_max: int = 500,
                  parallel: bool = True, threads: Optional[int] = None) -> RasterImage:
    """Boundedness of orbits of g(z) = e^{2 pi i alpha} z e^z inside D(0, 2):
    code n marks the first step with |w| > 2."""
    if p.family is not Family.THEOREM1:
        raise ValueError("render_siegel needs theorem1 params")
    return render_escape(named_map("g1", p), grid, n_max, SIEGEL_POLICY, parallel, threads)


def majority_pool(classes: np.ndarray, factor: int = 2) -> np.ndarray:
    """Most frequent class in each factor x factor block (ties to the smaller class)."""
    h, w = classes.shape
    blocks = classes[: h - h % factor, : w - w % factor].reshape(h // factor, factor,
                                                                 w // factor, factor)
    counts = np.stack([(blocks == c).sum(axis=(1, 3)) for c in range(3)])
    return counts.argmax(axis=0)


# the three classification-suite maps with their standard windows
STANDARD_WINDOWS = {
    "fatou": (-5.0, 15.0, -10.0, 10.0),
    "h1": (-12.0, 4.0, -8.0, 8.0),
    "h2": (-6.0, 6.0, -6.0, 6.0),
}


def standard_render(name: str, px: int = 64, n_max: int = 200, parallel: bool = True,
                    threads: Optional[int] = None) -> RasterImage:
    x0, x1, y0, y1 = STANDARD_WINDOWS[name]
    return render_escape(named_map(name), GridSpec.from_box(x0, x1, y0, y1, px), n_max,
                         parallel=parallel, threads=threads)
