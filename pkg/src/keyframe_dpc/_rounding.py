from decimal import ROUND_HALF_UP, Decimal


def round_half_up(x: float) -> int:
    """Round to the nearest integer, halves away from zero, on the exact binary value of ``x``."""
    return int(Decimal(x).quantize(Decimal(1), rounding=ROUND_HALF_UP))
