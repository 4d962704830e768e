"""Seeded Monte Carlo for the chain and for the coupled pair of chains.

The coupled pair moves two copies of the chain, one started at 1 and one at
0, under the joint kernel that meets them as fast as possible: from a split
state both land on j together with probability min(p0j, p1j), the residual
mass |beta - alpha| keeps them split, and from the diagonal they move as one
chain.  The first meeting time and the first joint visit to 0 are the
quantities of interest.

Streams are counter-based.  Block t of draws comes from a Philox generator
whose 256-bit counter encodes (purpose, t), and sample i always reads
position i of each block, so a sample is a pure function of (seed, i):
changing the number of samples, or splitting work across workers, never
changes an individual draw.  The rare sample still running after the fixed
lockstep horizon switches to a private stream keyed by its index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import ChainParams, Pmf, Start, _initial_law

__all__ = [
    "DEFAULT_STEP_CAP",
    "LOCKSTEP_HORIZON",
    "ChainSample",
    "CoupledState",
    "MeetingSample",
    "MeetingSamples",
    "BlockSample",
    "BlockSamples",
    "sample_chain",
    "sample_sums",
    "empirical_pmf",
    "coupled_transition_law",
    "step_coupled",
    "sample_meeting_times",
    "sample_blocks",
]

# Joint visits to 0 are simulated at most this many steps; a capped sample is
# recorded as censored and counts as >= cap in tail comparisons.
DEFAULT_STEP_CAP = 10_000

# Vectorized lockstep runs this many steps before stragglers switch to
# per-sample streams.
LOCKSTEP_HORIZON = 256

_PURPOSE_PATH = 0
_PURPOSE_SUMS = 1
_PURPOSE_MEETING = 2
_PURPOSE_BLOCKS = 3
_TAIL_FLAG = 1 << 8

_KEY_MASK = (1 << 128) - 1


def _stream(seed: int, purpose: int, block: int) -> np.random.Generator:
    counter = (purpose << 192) | (block << 64)
    return np.random.Generator(np.random.Philox(key=int(seed) & _KEY_MASK, counter=counter))


def _tail_stream(seed: int, purpose: int, index: int) -> np.random.Generator:
    return _stream(seed, purpose | _TAIL_FLAG, index)


@dataclass(frozen=True, eq=False)
class ChainSample:
    """One simulated trajectory: states at steps 0..n and the sum over 1..n."""

    path: np.ndarray
    total: int


def sample_chain(params: ChainParams, n: int, start: Start, seed: int) -> ChainSample:
    """Simulate one trajectory of the chain; deterministic given the seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    init = _initial_law(params, start)
    u = _stream(seed, _PURPOSE_PATH, 0).random(n + 1)
    path = np.zeros(n + 1, dtype=np.int8)
    state = 1 if u[0] < init[1] else 0
    path[0] = state
    a, b = params.alpha, params.beta
    for t in range(1, n + 1):
        to_one = b if state == 1 else a
        state = 1 if u[t] < to_one else 0
        path[t] = state
    return ChainSample(path=path, total=int(path[1:].sum()))


def sample_sums(
    params: ChainParams, n: int, start: Start, num_samples: int, seed: int
) -> np.ndarray:
    """Sums over steps 1..n for ``num_samples`` independent trajectories.

    Vectorized over samples in lockstep; sample i is reproducible on its own
    (see the module docstring for the stream layout).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    init = _initial_law(params, start)
    a, b = params.alpha, params.beta
    u0 = _stream(seed, _PURPOSE_SUMS, 0).random(num_samples)
    state = u0 < init[1]
    totals = np.zeros(num_samples, dtype=np.int64)
    for t in range(1, n + 1):
        u = _stream(seed, _PURPOSE_SUMS, t).random(num_samples)
        state = u < np.where(state, b, a)
        totals += state
    return totals


def empirical_pmf(values: np.ndarray, support_max: int | None = None) -> Pmf:
    """Empirical mass function of non-negative integer samples."""
    values = np.asarray(values)
    if values.size == 0:
        raise ValueError("no samples")
    minlength = support_max + 1 if support_max is not None else 0
    counts = np.bincount(values, minlength=minlength)
    return Pmf(counts / values.size)


@dataclass(frozen=True)
class CoupledState:
    """Pair state: z1 is the coordinate started at 1, z0 the one started at 0."""

    z1: int
    z0: int

    def __post_init__(self) -> None:
        if self.z1 not in (0, 1) or self.z0 not in (0, 1):
            raise ValueError("coordinates must be 0 or 1")


def coupled_transition_law(
    params: ChainParams, state: CoupledState
) -> dict[tuple[int, int], float]:
    """Exact one-step law of the coupled pair out of ``state``.

    From the diagonal both coordinates move together by the chain's own row,
    so the diagonal is absorbing.  From a split state the pair meets at j
    with probability min(p0j, p1j); the leftover |beta - alpha| keeps the
    orientation when beta > alpha and swaps it when beta < alpha.
    """
    a, b = params.alpha, params.beta
    if state.z1 == state.z0:
        to_one = b if state.z1 == 1 else a
        return {(0, 0): 1.0 - to_one, (1, 1): to_one}
    law = {(0, 0): min(1.0 - a, 1.0 - b), (1, 1): min(a, b)}
    stay = abs(b - a)
    if stay > 0.0:
        target = (state.z1, state.z0) if b > a else (state.z0, state.z1)
        law[target] = stay
    return law


def step_coupled(
    params: ChainParams, state: CoupledState, rng: np.random.Generator
) -> CoupledState:
    """One transition of the coupled pair, consuming a single uniform."""
    u = float(rng.random())
    law = coupled_transition_law(params, state)
    acc = 0.0
    targets = [(0, 0), (1, 1)] + [key for key in law if key not in ((0, 0), (1, 1))]
    for target in targets:
        acc += law.get(target, 0.0)
        if u < acc:
            return CoupledState(*target)
    return CoupledState(*targets[-1])


@dataclass(frozen=True)
class MeetingSample:
    """First meeting time and first joint visit to 0 of one coupled run."""

    varsigma: int
    tau: int
    tau_censored: bool = False

    def __post_init__(self) -> None:
        if not 1 <= self.varsigma <= self.tau:
            raise ValueError("need tau >= varsigma >= 1")


@dataclass(frozen=True, eq=False)
class MeetingSamples:
    """Column-wise collection of meeting samples.

    ``absorption_violations`` counts lockstep transitions that left the
    diagonal after a meeting; the kernel gives such moves probability zero,
    so any positive count flags a broken kernel.
    """

    varsigma: np.ndarray
    tau: np.ndarray
    censored: np.ndarray
    absorption_violations: int

    def __len__(self) -> int:
        return int(self.varsigma.size)

    def __getitem__(self, i: int) -> MeetingSample:
        return MeetingSample(
            varsigma=int(self.varsigma[i]),
            tau=int(self.tau[i]),
            tau_censored=bool(self.censored[i]),
        )

    def __iter__(self) -> Iterator[MeetingSample]:
        return (self[i] for i in range(len(self)))

    def varsigma_tail(self, m: int) -> float:
        """Empirical P(varsigma >= m)."""
        return float(np.mean(self.varsigma >= m))

    def tau_tail(self, m: int) -> float:
        """Empirical P(tau >= m); censored samples count as >= cap."""
        return float(np.mean(self.tau >= m))


# Pair states are encoded as s = 2*z1 + z0; 0 and 3 are the diagonal.
_SPLIT_10 = 2
_SPLIT_01 = 1


def _kernel_table(params: ChainParams) -> tuple[np.ndarray, ...]:
    a, b = params.alpha, params.beta
    meet0 = min(1.0 - a, 1.0 - b)
    meet1 = min(a, b)
    stay_10 = _SPLIT_10 if b > a else _SPLIT_01
    stay_01 = _SPLIT_01 if b > a else _SPLIT_10
    t1 = np.array([1.0 - a, meet0, meet0, 1.0 - b])
    t2 = np.array([1.0 - a, meet0 + meet1, meet0 + meet1, 1.0 - b])
    out2 = np.full(4, 3, dtype=np.int8)
    out3 = np.array([3, stay_01, stay_10, 3], dtype=np.int8)
    return t1, t2, out2, out3


def sample_meeting_times(
    params: ChainParams,
    num_samples: int,
    seed: int,
    step_cap: int = DEFAULT_STEP_CAP,
) -> MeetingSamples:
    """Independent coupled runs from (1, 0), recording (varsigma, tau).

    The pair is advanced through the joint kernel until it has met and then
    hit 0 together, or ``step_cap`` steps have elapsed (a censored sample
    keeps tau = cap, and varsigma = cap if it never even met).
    """
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    if step_cap < 1:
        raise ValueError("step_cap must be >= 1")
    t1, t2, out2, out3 = _kernel_table(params)

    state = np.full(num_samples, _SPLIT_10, dtype=np.int8)
    varsigma = np.zeros(num_samples, dtype=np.int64)
    tau = np.zeros(num_samples, dtype=np.int64)
    met = np.zeros(num_samples, dtype=bool)
    done = np.zeros(num_samples, dtype=bool)
    violations = 0

    horizon = min(step_cap, LOCKSTEP_HORIZON)
    t = 0
    while t < horizon and not done.all():
        t += 1
        u = _stream(seed, _PURPOSE_MEETING, t).random(num_samples)
        state = np.where(
            u < t1[state], np.int8(0), np.where(u < t2[state], out2[state], out3[state])
        ).astype(np.int8)
        on_diag = (state == 0) | (state == 3)
        violations += int(np.count_nonzero(met & ~on_diag))
        newly_met = on_diag & ~met
        varsigma[newly_met] = t
        met |= on_diag
        newly_zero = (state == 0) & ~done
        tau[newly_zero] = t
        done |= newly_zero

    for i in np.flatnonzero(~done):
        rng = _tail_stream(seed, _PURPOSE_MEETING, int(i))
        s = int(state[i])
        step = t
        while step < step_cap:
            step += 1
            u = float(rng.random())
            s = 0 if u < t1[s] else (int(out2[s]) if u < t2[s] else int(out3[s]))
            if s in (0, 3) and not met[i]:
                met[i] = True
                varsigma[i] = step
            if s == 0:
                tau[i] = step
                done[i] = True
                break
        if not done[i]:
            if not met[i]:
                varsigma[i] = step_cap
            tau[i] = step_cap

    return MeetingSamples(
        varsigma=varsigma,
        tau=tau,
        censored=~done,
        absorption_violations=violations,
    )


@dataclass(frozen=True)
class BlockSample:
    """Revisit counts of one regeneration cycle: xi_odd revisits of 0 before
    the move to 1, then xi_even revisits of 1 before the move back to 0."""

    xi_odd: int
    xi_even: int


@dataclass(frozen=True, eq=False)
class BlockSamples:
    """Column-wise collection of block samples."""

    xi_odd: np.ndarray
    xi_even: np.ndarray

    def __len__(self) -> int:
        return int(self.xi_odd.size)

    def __getitem__(self, i: int) -> BlockSample:
        return BlockSample(xi_odd=int(self.xi_odd[i]), xi_even=int(self.xi_even[i]))

    def __iter__(self) -> Iterator[BlockSample]:
        return (self[i] for i in range(len(self)))


def sample_blocks(params: ChainParams, num_samples: int, seed: int) -> BlockSamples:
    """Simulate one 0-block then one 1-block of the chain per sample.

    Starting at 0, each step stays (one more revisit) with probability
    1 - alpha or moves to 1; the 1-block then counts revisits with stay
    probability beta.  The two counts of a sample are independent by the
    regenerative structure.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    a, b = params.alpha, params.beta
    xi_odd = np.zeros(num_samples, dtype=np.int64)
    xi_even = np.zeros(num_samples, dtype=np.int64)
    phase = np.zeros(num_samples, dtype=np.int8)  # 0-block, 1-block, done

    t = 0
    while t < LOCKSTEP_HORIZON and not (phase == 2).all():
        t += 1
        u = _stream(seed, _PURPOSE_BLOCKS, t).random(num_samples)
        in_zero = phase == 0
        in_one = phase == 1
        leave_zero = in_zero & (u < a)
        xi_odd[in_zero & ~leave_zero] += 1
        phase[leave_zero] = 1
        leave_one = in_one & (u < 1.0 - b)
        xi_even[in_one & ~leave_one] += 1
        phase[leave_one] = 2

    for i in np.flatnonzero(phase != 2):
        rng = _tail_stream(seed, _PURPOSE_BLOCKS, int(i))
        ph = int(phase[i])
        while ph != 2:
            u = float(rng.random())
            if ph == 0:
                if u < a:
                    ph = 1
                else:
                    xi_odd[i] += 1
            else:
                if u < 1.0 - b:
                    ph = 2
                else:
                    xi_even[i] += 1

    return BlockSamples(xi_odd=xi_odd, xi_even=xi_even)
