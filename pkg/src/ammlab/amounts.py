"""Asset amounts and fee rates.

Amounts are plain Python ints constrained to the unsigned 128-bit range of
production exchange contracts.  Every operation boundary validates its
amounts with :func:`ensure_amount`; arithmetic that a 128-bit machine word
could not hold raises instead of wrapping.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import AmountOverflowError, PreconditionError

U128_MAX = (1 << 128) - 1

# Type alias used in signatures: a validated unsigned 128-bit integer.
AssetAmount = int


def ensure_amount(value: int, what: str = "amount") -> int:
    """Validate that ``value`` is an int in [0, 2**128).  Returns it."""
    if not isinstance(value, int) or isinstance(value, bool):
        raise PreconditionError(f"{what} must be an integer, got {type(value).__name__}")
    if value < 0:
        raise AmountOverflowError(f"{what} is negative: {value}")
    if value > U128_MAX:
        raise AmountOverflowError(f"{what} exceeds 128 bits: {value}")
    return value


def ensure_u128(value: int, what: str = "value") -> int:
    """Overflow guard for intermediates that must fit a 128-bit word."""
    if value > U128_MAX:
        raise AmountOverflowError(f"{what} overflows 128 bits: {value}")
    return value


@dataclass(frozen=True)
class FeeRate:
    """Swap commission as an exact rational kept by the pool.

    The default 997/1000 is the common 0.3% production fee.  ``numerator``
    is the fraction of the input that trades; the rest accrues to the pool.
    """

    numerator: int = 997
    denominator: int = 1000

    def __post_init__(self) -> None:
        if self.denominator <= 0:
            raise PreconditionError("fee denominator must be positive")
        if not 0 < self.numerator <= self.denominator:
            raise PreconditionError(
                f"fee numerator must satisfy 0 < num <= den, got {self.numerator}/{self.denominator}"
            )

    @property
    def gamma(self) -> Fraction:
        """Retained input fraction as an exact rational."""
        return Fraction(self.numerator, self.denominator)

    @property
    def band(self) -> Fraction:
        """Round-trip no-arbitrage factor gamma**2 (0.994009 at the default fee)."""
        return self.gamma * self.gamma
