"""Free parameters of the two surgery families."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from enum import Enum
from fractions import Fraction

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
LOG2 = math.log(2.0)


class Family(str, Enum):
    THEOREM1 = "theorem1"
    THEOREM2 = "theorem2"


class ParamsError(ValueError):
    """Raised when a parameter set violates the construction invariants."""


def looks_rational(x: float, max_den: int = 1000, tol: float = 1e-12) -> bool:
    """True if ``x`` is within ``tol`` of a fraction with denominator <= ``max_den``."""
    frac = Fraction(x).limit_denominator(max_den)
    return abs(float(frac) - x) < tol


@dataclass(frozen=True)
class ConstructionParams:
    """One member of a surgery family.

    ``theorem1`` uses ``alpha, m, x1, L, x0``; ``theorem2`` uses ``M, L``.
    ``k2_variant`` selects the perturbation exponent of the theorem2 core map:
    ``"literal"`` is exp(e^{-iz} - L) as printed, ``"rotated"`` is
    exp(e^{iz} - L), the theorem1 perturbation transported to the vertical strip.
    """

    family: Family = Family.THEOREM1
    alpha: float = GOLDEN
    m: int = 3
    x1: float = -8.0
    L: float = 256.0
    M: int = 8
    x0: float = -1.0
    k2_variant: str = "literal"

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))

    @classmethod
    def theorem1(cls, **kw) -> "ConstructionParams":
        return cls(family=Family.THEOREM1, **kw)

    @classmethod
    def theorem2(cls, **kw) -> "ConstructionParams":
        kw.setdefault("L", 8.0)
        return cls(family=Family.THEOREM2, **kw)

    @property
    def translation(self) -> complex:
        """Additive constant of h and k: 2*pi*i*(alpha+m) or 2 - log 2."""
        if self.family is Family.THEOREM1:
            return 2j * math.pi * (self.alpha + self.m)
        return complex(2.0 - LOG2, 0.0)

    @property
    def linear_coeff(self) -> float:
        # F = translation + linear_coeff * z + perturbation on the interpolation zones
        return 1.0 if self.family is Family.THEOREM1 else 2.0

    @property
    def multiplier(self) -> complex:
        """Multiplier e^{2 pi i alpha} of the Siegel model g at 0."""
        return complex(math.cos(2 * math.pi * self.alpha), math.sin(2 * math.pi * self.alpha))

    @property
    def cap_center(self) -> complex:
        if self.family is Family.THEOREM1:
            return complex(self.x1, 0.0)
        return complex(-2 * math.pi * self.M, -2 * math.pi)

    @property
    def alpha_flagged_rational(self) -> bool:
        return looks_rational(self.alpha)

    def issues(self) -> list[str]:
        out = []
        if not self.L > 0:
            out.append(f"L must be positive (got {self.L})")
        if self.family is Family.THEOREM1:
            if self.m < 3:
                out.append(f"m must be >= 3 (got {self.m})")
            if not 0.0 < self.alpha < 1.0:
                out.append(f"alpha must lie in (0, 1) (got {self.alpha})")
            if not self.x0 < 0:
                out.append(f"x0 must be negative (got {self.x0})")
            if not self.x1 < self.x0 - math.pi:
                out.append(f"x1 must be < x0 - pi = {self.x0 - math.pi:.6g} (got {self.x1})")
        else:
            if self.M < 1 or int(self.M) != self.M:
                out.append(f"M must be a positive integer (got {self.M})")
            if self.k2_variant not in ("literal", "rotated"):
                out.append(f"unknown k2_variant {self.k2_variant!r}")
        return out

    def validate(self) -> "ConstructionParams":
        problems = self.issues()
        if problems:
            raise ParamsError("; ".join(problems))
        return self

    def with_(self, **kw) -> "ConstructionParams":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        return d
