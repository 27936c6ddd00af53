"""Facilitator payoff analysis under a per-server failure rate.

Works in normalized units: the file's value is 1, so serving one chunk
costs 1/k. A facilitator's advantage per purchase is payoff minus cost;
the expectation decomposes over three events (chosen and serves, not
chosen, chosen but fails) and collapses algebraically to p_o - (1-f)/n.
The ledger maps a normalized payoff to currency by price scaling.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True)
class IncentiveParams:
    n: int
    k: int
    f: float  # per-facilitator failure rate
    p_o: float  # payoff per request, normalized units

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.k, int)):
            raise InvalidParams("n and k must be integers")
        if not 1 <= self.k <= self.n:
            raise InvalidParams(f"need 1 <= k <= n, got k={self.k} n={self.n}")
        if not 0.0 <= self.f <= 1.0:
            raise InvalidParams(f"failure rate must be in [0,1], got {self.f}")

    @property
    def serve_cost(self) -> float:
        return 1.0 / self.k


def expected_advantage(params: IncentiveParams) -> float:
    """Expected per-request advantage of one facilitator.

    Three-term event decomposition: chosen (prob k/n) and serving (prob
    1-f) earns p_o minus the 1/k serving cost; not being chosen or being
    chosen but failing earns p_o outright.
    """
    n, k, f, p_o = params.n, params.k, params.f, params.p_o
    chosen = k / n
    return (
        (1.0 - f) * chosen * (p_o - 1.0 / k)
        + (1.0 - chosen) * p_o
        + chosen * f * p_o
    )


def solve_payoff(n: int, k: int, f: float, target_advantage: float) -> float:
    """The p_o making expected_advantage equal target_advantage.

    The expectation is affine in p_o with unit coefficient, so the solution
    is target + (1-f)/n in closed form. A negative solution (f > 0.5 at the
    usual -f/n target) is clamped to 0 with a warning; paying facilitators
    cannot be negative.
    """
    IncentiveParams(n=n, k=k, f=f, p_o=0.0)  # validate
    p_o = target_advantage + (1.0 - f) / n
    if p_o < 0.0:
        warnings.warn(
            f"solved payoff {p_o:.6g} is negative (f={f}); clamping to 0",
            stacklevel=2,
        )
        return 0.0
    return p_o


def valid_k_bounds(n: int, b: int) -> tuple[int, int]:
    """Exclusive bounds on k for fairness and privacy with b faulty nodes.

    k must exceed b (privacy, censorship) and stay below n-b (client
    fairness): the open interval (b, n-b).
    """
    if not 0 <= b < n:
        raise InvalidParams(f"need 0 <= b < n, got b={b} n={n}")
    return (b, n - b)


def valid_k_values(n: int, b: int) -> list[int]:
    """Integer k values strictly inside the (b, n-b) interval; may be empty."""
    lo, hi = valid_k_bounds(n, b)
    return [k for k in range(lo + 1, hi) if 1 <= k <= n]


def pbft_bounds(n: int) -> tuple[float, float]:
    """k bounds when the ledger runs PBFT-style consensus: (n/3, 2n/3)."""
    if n < 1:
        raise InvalidParams(f"need n >= 1, got n={n}")
    return (n / 3.0, 2.0 * n / 3.0)


def pbft_k_values(n: int) -> list[int]:
    """Integer k strictly between n/3 and 2n/3 (exact integer arithmetic)."""
    return [k for k in range(1, n + 1) if 3 * k > n and 3 * k < 2 * n]


def facilitator_payout_micros(price_micros: int, n: int, failure_rate: float = 0.0) -> int:
    """Map the recommended normalized payoff (1-2f)/n to currency micros.

    Exact rational arithmetic, rounded down so that n * p_o never exceeds
    the price; the publisher absorbs the sub-micro remainder.
    """
    if price_micros < 0:
        raise InvalidParams("price must be non-negative")
    if n < 1:
        raise InvalidParams("need at least one facilitator")
    if not 0.0 <= failure_rate <= 1.0:
        raise InvalidParams(f"failure rate must be in [0,1], got {failure_rate}")
    ratio = Fraction(1) - 2 * Fraction(failure_rate)
    if ratio < 0:
        warnings.warn(
            f"failure rate {failure_rate} > 0.5 gives a negative payout; clamping to 0",
            stacklevel=2,
        )
        return 0
    return int(price_micros * ratio / n)
