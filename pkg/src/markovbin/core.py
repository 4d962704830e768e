"""Exact distributional computations for two-state Markov chains.

The chain lives on {0, 1} with one-step probabilities P(0 -> 1) = alpha and
P(1 -> 1) = beta, both strictly inside (0, 1).  S denotes the sum of n
consecutive states; its law (the Markov binomial distribution) is computed
exactly by dynamic programming over (step, current state, partial sum).
Everything in this module is deterministic; Monte Carlo lives in
``markovbin.coupling``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

__all__ = [
    "MAX_EXACT_N",
    "PMF_TOL",
    "ChainParams",
    "StationaryLaw",
    "Pmf",
    "MomentSummary",
    "stationary_law",
    "exact_pmf",
    "exact_conditional_pmf",
    "moments_closed_form",
    "moments_from_pmf",
    "tv_distance",
    "shift_tv",
]

# The DP is O(n^2) time; this cap guards against accidental huge inputs.
MAX_EXACT_N = 100_000

# Normalization tolerance for exactly-constructed mass functions.
PMF_TOL = 1e-12

Start = Union[str, Sequence[float]]


@dataclass(frozen=True)
class ChainParams:
    """Transition pair of the chain: P(0 -> 1) = alpha, P(1 -> 1) = beta."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name, value in (("alpha", self.alpha), ("beta", self.beta)):
            if not (0.0 < float(value) < 1.0):
                raise ValueError(f"{name} must lie strictly in (0, 1), got {value!r}")

    @property
    def transition_matrix(self) -> np.ndarray:
        """Row-stochastic matrix [[1-alpha, alpha], [1-beta, beta]]."""
        return np.array(
            [[1.0 - self.alpha, self.alpha], [1.0 - self.beta, self.beta]]
        )


@dataclass(frozen=True)
class StationaryLaw:
    """Invariant law of the chain: mass ``p`` at state 1, ``p0`` at state 0."""

    p: float
    p0: float

    def __post_init__(self) -> None:
        if abs(self.p + self.p0 - 1.0) > PMF_TOL:
            raise ValueError("stationary masses must sum to 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.p0, self.p])


def stationary_law(params: ChainParams) -> StationaryLaw:
    """Invariant law: p = alpha / (1 - beta + alpha).

    The denominator is evaluated as ``1 - (beta - alpha)`` so that the
    alpha == beta case yields p == alpha exactly in floating point.
    """
    denom = 1.0 - (params.beta - params.alpha)
    return StationaryLaw(p=params.alpha / denom, p0=(1.0 - params.beta) / denom)


@dataclass(frozen=True, eq=False)
class Pmf:
    """A law on {0, ..., N}, possibly the truncation of a law on Z+.

    ``mass[k]`` is P(k).  ``tail`` is the reported mass beyond N for truncated
    constructions and zero for exact ones; ``tol`` is the normalization
    tolerance the instance was declared with (mass + tail must sum to 1
    within it).
    """

    mass: np.ndarray
    tail: float = 0.0
    tol: float = PMF_TOL

    def __post_init__(self) -> None:
        mass = np.asarray(self.mass, dtype=float)
        object.__setattr__(self, "mass", mass)
        if mass.ndim != 1 or mass.size == 0:
            raise ValueError("mass must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(mass)) or np.any(mass < 0.0):
            raise ValueError("mass entries must be finite and non-negative")
        if not (0.0 <= self.tail < 1.0):
            raise ValueError(f"tail mass out of range: {self.tail!r}")
        total = float(mass.sum()) + self.tail
        if abs(total - 1.0) > self.tol:
            raise ValueError(
                f"mass + tail sums to {total!r}, off by more than tol={self.tol!r}"
            )

    def __len__(self) -> int:
        return int(self.mass.size)

    @property
    def support_max(self) -> int:
        return int(self.mass.size - 1)


def _as_mass(p: "Pmf | Sequence[float] | np.ndarray") -> np.ndarray:
    return np.asarray(getattr(p, "mass", p), dtype=float)


def _initial_law(params: ChainParams, start: Start) -> np.ndarray:
    if isinstance(start, str):
        if start == "stationary":
            return stationary_law(params).as_array()
        if start == "state0":
            return np.array([1.0, 0.0])
        if start == "state1":
            return np.array([0.0, 1.0])
        raise ValueError(
            f"start must be 'stationary', 'state0', 'state1' or a length-2 law, got {start!r}"
        )
    law = np.asarray(start, dtype=float)
    if law.shape != (2,) or np.any(law < 0.0) or abs(float(law.sum()) - 1.0) > PMF_TOL:
        raise ValueError(f"custom start must be a probability law on {{0, 1}}, got {start!r}")
    return law


def exact_pmf(params: ChainParams, n: int, start: Start = "stationary") -> Pmf:
    """Exact law of the n-step sum under the given start.

    The chain is anchored at step 0 with the initial law named by ``start``
    and the sum runs over steps 1..n, so the anchoring state itself is never
    counted.  ``start="state0"`` therefore gives the law of the sum of n
    transitions out of state 0.  For the stationary start this coincides with
    summing n stationary states.  O(n^2) time, O(n) memory.
    """
    if n < 1:
        raise ValueError("n must be >= 1 (the empty sum is not defined here)")
    if n > MAX_EXACT_N:
        raise ValueError(f"n={n} exceeds MAX_EXACT_N={MAX_EXACT_N}")
    init = _initial_law(params, start)
    a, b = params.alpha, params.beta

    # f0[k], f1[k]: probability of (partial sum k, current state 0 or 1).
    f0 = np.zeros(n + 1)
    f1 = np.zeros(n + 1)
    g0 = np.zeros(n + 1)
    g1 = np.zeros(n + 1)
    f0[0] = init[0]
    f1[0] = init[1]
    for t in range(n):
        hi = t + 1  # populated entries are 0..t before this step
        g0[:hi] = (1.0 - a) * f0[:hi] + (1.0 - b) * f1[:hi]
        g0[hi] = 0.0
        g1[0] = 0.0
        g1[1 : hi + 1] = a * f0[:hi] + b * f1[:hi]
        f0, g0 = g0, f0
        f1, g1 = g1, f1
    return Pmf(f0 + f1)


def exact_conditional_pmf(params: ChainParams, n: int, i: int, j: int) -> Pmf:
    """Exact law of S - X_i given X_i = j, for the stationary chain.

    Conditioned on the state at step i, the left segment (steps 1..i-1) and
    the right segment (steps i+1..n) are independent.  The left segment is
    the reversed chain run i-1 steps out of state j; the stationary two-state
    chain satisfies detailed balance, so the reversed chain has the same
    transition matrix and both segments reuse the forward DP.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 1 <= i <= n:
        raise ValueError(f"index i={i} out of range 1..{n}")
    if j not in (0, 1):
        raise ValueError(f"state j must be 0 or 1, got {j!r}")
    start = "state1" if j == 1 else "state0"
    left = exact_pmf(params, i - 1, start).mass if i > 1 else np.ones(1)
    right = exact_pmf(params, n - i, start).mass if i < n else np.ones(1)
    return Pmf(np.convolve(left, right))


@dataclass(frozen=True)
class MomentSummary:
    """Closed-form mean/variance of the stationary sum with its correction
    coefficients a0 (per-step variance excess) and a1 = a0 / (1 - beta + alpha)."""

    mean: float
    variance: float
    a0: float
    a1: float

    def __post_init__(self) -> None:
        if self.variance < 0.0:
            raise ValueError(f"variance must be non-negative, got {self.variance!r}")


def moments_closed_form(params: ChainParams, n: int) -> MomentSummary:
    """Mean n*p and variance n*p*(1-p) + n*a0 - a1 + a1*(beta-alpha)^n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    a, b = params.alpha, params.beta
    delta = b - a
    denom = 1.0 - delta
    p = a / denom
    a0 = 2.0 * a * (1.0 - b) * delta / denom**3
    a1 = a0 / denom
    mean = n * p
    variance = n * p * (1.0 - p) + n * a0 - a1 + a1 * delta**n
    return MomentSummary(mean=mean, variance=variance, a0=a0, a1=a1)


def moments_from_pmf(pmf: "Pmf | Sequence[float]") -> tuple[float, float]:
    """First two moments of a tabulated law by direct summation.

    The variance uses the two-pass form sum((k - mean)^2 * p_k), which avoids
    the cancellation of E[S^2] - (E S)^2 when the mean is large.  Tail mass of
    truncated laws is ignored (the moments are those of the tabulated part).
    """
    mass = _as_mass(pmf)
    k = np.arange(mass.size, dtype=float)
    mean = float(k @ mass)
    variance = float(((k - mean) ** 2) @ mass)
    return mean, variance


def tv_distance(p: "Pmf | Sequence[float]", q: "Pmf | Sequence[float]") -> float:
    """Total variation distance: half the L1 distance between mass functions.

    For laws on the integers this equals the supremum of |P(A) - Q(A)| over
    subsets A.  Supports of different lengths are zero-padded.
    """
    a = _as_mass(p)
    b = _as_mass(q)
    if a.size < b.size:
        a = np.pad(a, (0, b.size - a.size))
    elif b.size < a.size:
        b = np.pad(b, (0, a.size - b.size))
    return 0.5 * float(np.abs(a - b).sum())


def shift_tv(p: "Pmf | Sequence[float]") -> float:
    """TV distance between a law and its unit right-shift.

    Small values mean the law is smooth enough for difference-based error
    terms to be small.
    """
    mass = _as_mass(p)
    padded = np.concatenate((mass, [0.0]))
    shifted = np.concatenate(([0.0], mass))
    return 0.5 * float(np.abs(padded - shifted).sum())
