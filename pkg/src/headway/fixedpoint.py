"""Two's-complement / unsigned fixed-point formats used by the accelerator model.

A value x is stored as the integer code round(x * 2^frac_bits), clamped to
the format's representable range. Codes are plain Python ints so widths past
64 bits in intermediate math cannot silently wrap.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NumericError, ValidationError


@dataclass(frozen=True)
class QFormat:
    total_bits: int
    frac_bits: int
    signed: bool

    def __post_init__(self):
        if not 0 < self.frac_bits <= self.total_bits <= 64:
            raise ValidationError(
                f"need 0 < frac_bits <= total_bits <= 64, got {self.frac_bits}/{self.total_bits}"
            )

    @property
    def scale(self) -> int:
        return 1 << self.frac_bits

    @property
    def min_code(self) -> int:
        if self.signed:
            return -(1 << (self.total_bits - 1))
        return 0

    @property
    def max_code(self) -> int:
        if self.signed:
            return (1 << (self.total_bits - 1)) - 1
        return (1 << self.total_bits) - 1

    def clamp(self, code: int) -> int:
        return min(max(int(code), self.min_code), self.max_code)

    def quantize(self, x: float) -> int:
        """Nearest-code representation of x, saturating at the range ends."""
        return self.clamp(round(x * self.scale))

    def quantize_exact(self, x: float, what: str = "value") -> int:
        """Like quantize, but out-of-range x is an error instead of saturating."""
        code = round(x * self.scale)
        if code < self.min_code or code > self.max_code:
            raise NumericError(
                f"{what} {x!r} does not fit {self.describe()} "
                f"(code {code} outside [{self.min_code}, {self.max_code}])"
            )
        return code

    def dequantize(self, code: int) -> float:
        return code / self.scale

    def contains(self, code: int) -> bool:
        return self.min_code <= int(code) <= self.max_code

    def describe(self) -> str:
        kind = "S" if self.signed else "U"
        return f"{kind}({self.total_bits},{self.frac_bits})"

    def to_dict(self) -> dict:
        return {
            "total_bits": self.total_bits,
            "frac_bits": self.frac_bits,
            "signed": self.signed,
        }


def qformat_from_dict(d: dict) -> QFormat:
    return QFormat(
        total_bits=int(d["total_bits"]),
        frac_bits=int(d["frac_bits"]),
        signed=bool(d["signed"]),
    )
