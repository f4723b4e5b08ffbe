from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .errors import ValidationError


def as_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"not a rational number: {value!r}") from exc


@dataclass(frozen=True)
class GevreyParams:
    """Gevrey indices (s in x, σ in ξ); both rational and at least 1."""

    s: Fraction = Fraction(1)
    sigma: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "s", as_fraction(self.s))
        object.__setattr__(self, "sigma", as_fraction(self.sigma))
        if self.s < 1 or self.sigma < 1:
            raise ValidationError(f"Gevrey indices must be >= 1, got s={self.s}, sigma={self.sigma}")

    @property
    def exponent(self) -> Fraction:
        """s + σ − 1, the factorial exponent of the h-grading."""
        return self.s + self.sigma - 1

    @property
    def integral(self) -> bool:
        return self.s.denominator == 1 and self.sigma.denominator == 1

    def join(self, other: "GevreyParams") -> "GevreyParams":
        return GevreyParams(max(self.s, other.s), max(self.sigma, other.sigma))

    def to_dict(self) -> dict[str, str]:
        return {"s": str(self.s), "sigma": str(self.sigma)}
