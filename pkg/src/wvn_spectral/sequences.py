"""Summable real sequences indexed from ``n = 1``.

Both the short-range potential ``q_n`` and the scalar profile of the
model-system remainder ``R_n`` are described by one of a few tagged
families, so that they can be written down in a config file and evaluated
in arbitrary index windows without materialising the whole sequence.

Spec strings accepted by :meth:`SequenceFamily.parse`::

    zero
    geometric:RATIO[:SCALE]      scale * ratio**n
    power:EXPONENT[:SCALE]       scale * n**(-exponent), exponent > 1
    list:V1,V2,...               finitely supported, zero after the list
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

KINDS = ("zero", "geometric", "power", "list")


@dataclass(frozen=True)
class SequenceFamily:
    kind: str = "zero"
    ratio: float = 0.0
    exponent: float = 2.0
    scale: float = 1.0
    values: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sequence family {self.kind!r}; expected one of {KINDS}")
        if self.kind == "geometric" and not abs(self.ratio) < 1:
            raise ValueError("geometric family needs |ratio| < 1 to be summable")
        if self.kind == "power" and not self.exponent > 1:
            raise ValueError("power family needs exponent > 1 to be summable")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> "SequenceFamily":
        return cls("zero")

    @classmethod
    def geometric(cls, ratio: float, scale: float = 1.0) -> "SequenceFamily":
        return cls("geometric", ratio=float(ratio), scale=float(scale))

    @classmethod
    def power(cls, exponent: float, scale: float = 1.0) -> "SequenceFamily":
        return cls("power", exponent=float(exponent), scale=float(scale))

    @classmethod
    def from_list(cls, values) -> "SequenceFamily":
        return cls("list", values=tuple(values))

    @classmethod
    def parse(cls, spec: str) -> "SequenceFamily":
        spec = spec.strip()
        kind, _, rest = spec.partition(":")
        kind = kind.strip().lower()
        try:
            if kind == "zero":
                return cls.zero()
            if kind == "geometric":
                parts = [float(x) for x in rest.split(":")]
                return cls.geometric(*parts)
            if kind == "power":
                parts = [float(x) for x in rest.split(":")]
                return cls.power(*parts)
            if kind == "list":
                vals = [float(x) for x in rest.split(",") if x.strip()]
                return cls.from_list(vals)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"malformed sequence spec {spec!r}: {exc}") from exc
        raise ValueError(f"unknown sequence family in spec {spec!r}")

    def spec(self) -> str:
        """Inverse of :meth:`parse` (up to float repr)."""
        if self.kind == "zero":
            return "zero"
        if self.kind == "geometric":
            return f"geometric:{self.ratio!r}:{self.scale!r}"
        if self.kind == "power":
            return f"power:{self.exponent!r}:{self.scale!r}"
        return "list:" + ",".join(repr(v) for v in self.values)

    def to_dict(self) -> dict:
        return {"spec": self.spec()}

    @classmethod
    def from_dict(cls, d) -> "SequenceFamily":
        if isinstance(d, str):
            return cls.parse(d)
        if isinstance(d, (list, tuple)):
            return cls.from_list(d)
        return cls.parse(d["spec"])

    # -- evaluation -------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return (
            self.kind == "zero"
            or self.scale == 0.0
            or (self.kind == "list" and not any(self.values))
            or (self.kind == "geometric" and self.ratio == 0.0)
        )

    def window(self, start: int, stop: int) -> np.ndarray:
        """Values at indices ``start, ..., stop - 1`` (1-based)."""
        if start < 1:
            raise ValueError("sequences are indexed from n = 1")
        n = np.arange(start, max(start, stop), dtype=float)
        if self.kind == "zero":
            return np.zeros_like(n)
        if self.kind == "geometric":
            with np.errstate(under="ignore"):
                return self.scale * np.power(self.ratio, n)
        if self.kind == "power":
            return self.scale * n ** (-self.exponent)
        out = np.zeros_like(n)
        vals = np.asarray(self.values, dtype=float)
        lo, hi = start - 1, min(stop - 1, len(vals))
        if hi > lo:
            out[: hi - lo] = vals[lo:hi]
        return out

    def __call__(self, n: int) -> float:
        return float(self.window(n, n + 1)[0])

    def support_end(self) -> int | None:
        """Index past which every term is exactly zero in double precision, or ``None``."""
        if self.is_zero:
            return 1
        if self.kind == "list":
            return len(self.values) + 1
        if self.kind == "geometric":
            # below half the smallest subnormal the power rounds to zero
            r = abs(self.ratio)
            floor = math.log(5e-324) - math.log(2.0)
            return int(math.ceil((floor - math.log(abs(self.scale))) / math.log(r))) + 1
        return None

    def l1_norm(self) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "geometric":
            r = abs(self.ratio)
            return abs(self.scale) * r / (1.0 - r)
        if self.kind == "power":
            from scipy.special import zeta

            return abs(self.scale) * float(zeta(self.exponent))
        return float(np.sum(np.abs(self.values)))

    def tail_l1(self, n: int) -> float:
        """Upper bound for ``sum_{k >= n} |s_k|``."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "geometric":
            r = abs(self.ratio)
            return abs(self.scale) * r**n / (1.0 - r)
        if self.kind == "power":
            p = self.exponent
            # integral comparison: sum_{k>=n} k^-p <= n^-p + n^(1-p)/(p-1)
            return abs(self.scale) * (n ** (-p) + n ** (1 - p) / (p - 1))
        return float(np.sum(np.abs(self.values[n - 1:])))
