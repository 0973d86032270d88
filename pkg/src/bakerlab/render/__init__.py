"""Escape-time rendering: compiled per-pixel loop, fixed palette, PPM output."""
from .core import (SIEGEL_POLICY, STANDARD_WINDOWS, GridSpec, RasterImage, majority_pool,
                   render_escape, render_siegel, set_threads, standard_render)
from .ppm import BOUNDED_RGB, OVERFLOW_RGB, PALETTE, PALETTE_SHA256, colorize, decode_ppm, encode_ppm

__all__ = [
    "GridSpec", "RasterImage", "render_escape", "render_siegel", "standard_render",
    "majority_pool", "set_threads", "SIEGEL_POLICY", "STANDARD_WINDOWS",
    "PALETTE", "PALETTE_SHA256", "BOUNDED_RGB", "OVERFLOW_RGB", "colorize",
    "encode_ppm", "decode_ppm",
]
