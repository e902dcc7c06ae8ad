"""Exception hierarchy shared by all ammlab modules."""


class AmmError(Exception):
    """Base class for all domain errors raised by this package."""


class AmountOverflowError(AmmError):
    """An amount or guarded intermediate left the unsigned 128-bit range."""


class InvalidPoolError(AmmError):
    """Operation on a pool with a zero reserve."""


class PreconditionError(AmmError):
    """Caller violated a documented precondition."""


class MixedFeeError(PreconditionError):
    """Pools with different fee rates were combined."""


class SlippageError(AmmError):
    """Swap would return less than the requested minimum; state unchanged."""


class NotProfitableError(PreconditionError):
    """Arbitrage requested on a pool pair that offers no profit."""


class UnsynchronizedError(PreconditionError):
    """Split ratio requested for pools whose prices are outside the fee band."""


class InternalError(AmmError):
    """Invariant that should be unreachable was violated; please report."""


class CompressionError(AmmError):
    """A leg sequence nets to something a single swap cannot represent."""


class SaturationError(AmmError):
    """Flooding overhead exceeds the available bandwidth."""


class OracleError(AmmError):
    """Brute-force search spec too coarse or otherwise unusable."""


class TraceError(AmmError):
    """Trace file is structurally unusable (per-record problems are counted,
    not raised)."""
