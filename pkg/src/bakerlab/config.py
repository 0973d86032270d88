"""Run configuration: TOML file with flat per-module sections, overridden
by command-line flags."""
from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .params import GOLDEN, ConstructionParams, Family


@dataclass
class RunConfig:
    # [params]
    family: str = "theorem1"
    alpha: float = GOLDEN
    m: int = 3
    x1: float = -8.0
    L: Optional[float] = None
    M: int = 8
    x0: float = -1.0
    k2_variant: str = "literal"
    # [dynamics]
    map: Optional[str] = None
    eps: float = 0.05
    tail_fraction: float = 0.25
    beta_start: int = 5
    min_orbit: int = 12
    n_max: Optional[int] = None
    escape_threshold: Optional[float] = None
    consecutive: int = 3
    modulus_cap: float = 1e8
    directions: int = 32
    # [qrcheck]
    grid_density: int = 200
    span: float = 40.0
    margin: float = 0.05
    growth_samples: int = 20000
    # [metric]
    x_ladder: list = field(default_factory=lambda: [100.0, 200.0, 400.0])
    delta: float = 0.1
    y1: Optional[float] = None
    x2: Optional[float] = None
    # [render]
    center: list = field(default_factory=lambda: [5.0, 0.0])
    width: float = 20.0
    height: float = 20.0
    px_w: int = 256
    px_h: int = 256
    render_n_max: int = 200
    # [run]
    out: str = "out"
    seed: int = 0
    threads: Optional[int] = None

    def params(self) -> ConstructionParams:
        """ConstructionParams for theorem1 / theorem2 families (validated)."""
        fam = Family.THEOREM2 if self.family == "theorem2" else Family.THEOREM1
        L = self.L if self.L is not None else (256.0 if fam is Family.THEOREM1 else 8.0)
        p = ConstructionParams(family=fam, alpha=self.alpha, m=int(self.m), x1=float(self.x1),
                               L=float(L), M=int(self.M), x0=float(self.x0),
                               k2_variant=self.k2_variant)
        return p.validate()

    def to_dict(self) -> dict:
        return asdict(self)


FIELD_NAMES = {f.name for f in fields(RunConfig)}


class ConfigError(ValueError):
    pass


def load_toml(path) -> dict:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    flat = {}
    for key, val in data.items():
        items = val.items() if isinstance(val, dict) else [(key, val)]
        for k, v in items:
            if k not in FIELD_NAMES:
                raise ConfigError(f"unknown config key {k!r}")
            flat[k] = v
    return flat


def resolve(path=None, overrides: Optional[dict] = None) -> RunConfig:
    values = load_toml(path) if path else {}
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    unknown = set(values) - FIELD_NAMES
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    return RunConfig(**values)
