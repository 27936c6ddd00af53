"""Fixed-point currency: integer micro-units, 6 fractional digits.

Balances and payouts are plain ints internally so conservation checks are
exact; floats never touch account math. Strings at the API edge."""

from __future__ import annotations

from decimal import Decimal, InvalidOperation

MICRO = 10**6


class MoneyError(ValueError):
    pass


def to_micros(value) -> int:
    """Parse a currency amount (str/int/Decimal) to integer micro-units.

    Rejects more than 6 fractional digits rather than silently rounding.
    """
    if isinstance(value, bool):
        raise MoneyError(f"not a currency amount: {value!r}")
    if isinstance(value, int):
        return value * MICRO
    if isinstance(value, float):
        # floats are forbidden in balances; accept only exact CLI-style values
        value = repr(value)
    try:
        quantum = Decimal(value).scaleb(6)
    except InvalidOperation as exc:
        raise MoneyError(f"not a currency amount: {value!r}") from exc
    if quantum != quantum.to_integral_value():
        raise MoneyError(f"more than 6 fractional digits: {value!r}")
    return int(quantum)


def from_micros(micros: int) -> str:
    """Render micro-units as a fixed 6-decimal string, e.g. 7000000 -> '7.000000'."""
    sign = "-" if micros < 0 else ""
    units, frac = divmod(abs(micros), MICRO)
    return f"{sign}{units}.{frac:06d}"
