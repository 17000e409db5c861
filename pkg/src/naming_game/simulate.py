"""Stochastic conversation process on the complete graph.

Each conversation picks a speaker uniformly from all N agents and a
listener uniformly from the other N-1.  The speaker voices A with
probability i/K (A-zealots always, B-zealots never); a normal listener
moves one state toward what it heard, zealot listeners stay put.  Every
conversation advances time by 1/N sweeps, including zealot-to-zealot ones.

Randomness comes from numpy's default generator (PCG64), seeded per run,
with exactly three draws per conversation in fixed order: speaker index
via integers(N), listener index via integers(N-1) shifted past the
speaker, and one uniform for the utterance.  Trajectories are therefore
bit-reproducible given (params, N, init, seed, cadence).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import InvalidPopulationError
from .model import ModelParams, geometric_distribution

__all__ = ["Population", "Trajectory", "init_population", "mc_step", "simulate", "absorption_time"]

_AT_M = re.compile(r"at-m\(([^)]+)\)\Z")


@dataclass(frozen=True)
class Population:
    """Integer agent counts: normals per state plus fixed zealot blocks."""

    params: ModelParams
    N: int
    counts: tuple[int, ...]
    nz_a: int
    nz_b: int

    def __post_init__(self):
        if len(self.counts) != self.params.K + 1:
            raise ValueError("counts must have length K+1")
        if min(self.counts) < 0 or self.nz_a < 0 or self.nz_b < 0:
            raise ValueError("agent counts must be nonnegative")
        if sum(self.counts) + self.nz_a + self.nz_b != self.N:
            raise ValueError("counts and zealots must add up to N")

    def magnetization(self) -> float:
        K = self.params.K
        weighted = sum(i * c for i, c in enumerate(self.counts))
        return (weighted + K * self.nz_a) / (K * self.N)


@dataclass(frozen=True)
class Trajectory:
    """Recorded magnetization time series, in sweeps (= conversations/N)."""

    times: np.ndarray
    m: np.ndarray
    counts: np.ndarray | None = None  # optional (n_records, K+1) snapshots

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


def _largest_remainder(weights: np.ndarray, total: int) -> list[int]:
    # Apportion `total` agents proportionally to weights with exact sum:
    # floor the targets, then hand the leftovers to the largest remainders
    # (ties broken by lower state index, for determinism).
    targets = weights * (total / weights.sum())
    base = np.floor(targets).astype(int)
    rem = total - int(base.sum())
    order = np.argsort(-(targets - base), kind="stable")
    for j in order[:rem]:
        base[j] += 1
    return [int(c) for c in base]


def init_population(params: ModelParams, N: int, init: str = "uniform") -> Population:
    """Build the starting population for one of the named layouts.

    init is one of uniform | consensus-a | consensus-b | at-m(X).  Zealot
    counts round to the nearest integer with ties toward more zealots;
    at-m(X) places normals on the geometric distribution for m = X by
    largest-remainder rounding.
    """
    if int(N) != N or N < 2:
        raise ValueError("N must be an integer >= 2")
    N = int(N)
    nz_a = int(math.floor(params.z_a * N + 0.5))
    nz_b = int(math.floor(params.z_b * N + 0.5))
    n_norm = N - nz_a - nz_b
    if n_norm < 1:
        raise InvalidPopulationError(
            f"zealot rounding leaves {n_norm} normal agents at N={N} (z_a={params.z_a}, z_b={params.z_b})"
        )

    K = params.K
    counts = [0] * (K + 1)
    if init == "uniform":
        counts = _largest_remainder(np.ones(K + 1), n_norm)
    elif init == "consensus-a":
        counts[K] = n_norm
    elif init == "consensus-b":
        counts[0] = n_norm
    else:
        mat = _AT_M.match(init)
        if not mat:
            raise ValueError(f"unknown init {init!r}")
        m = float(mat.group(1))
        weights = geometric_distribution(m, ModelParams(K)).rho
        counts = _largest_remainder(weights, n_norm)
    return Population(params, N, tuple(counts), nz_a, nz_b)


def _speak_and_listen(counts: list, nz_a: int, K: int, s: int, l: int, u: float) -> int:
    """Apply one conversation to mutable normal counts; return the change
    in the weighted sum of states (-1, 0, or +1).

    Agent indices run through normals in state order, then A-zealots, then
    B-zealots.  s, l are distinct agent indices and u is the utterance
    uniform.
    """
    # resolve the speaker's utterance: True = A
    idx = s
    voice_a = None
    for i in range(K + 1):
        if idx < counts[i]:
            voice_a = u * K < i
            break
        idx -= counts[i]
    if voice_a is None:
        voice_a = idx < nz_a  # A-zealots speak A, B-zealots speak B

    # resolve the listener; zealots never move
    idx = l
    for i in range(K + 1):
        if idx < counts[i]:
            if voice_a:
                if i < K:
                    counts[i] -= 1
                    counts[i + 1] += 1
                    return 1
            else:
                if i > 0:
                    counts[i] -= 1
                    counts[i - 1] += 1
                    return -1
            return 0
        idx -= counts[i]
    return 0


def mc_step(pop: Population, rng: np.random.Generator) -> Population:
    """One conversation; returns the successor population.

    Consumes exactly three draws from rng regardless of outcome, so a
    sequence of mc_step calls reproduces simulate() draw for draw.
    """
    s = int(rng.integers(pop.N))
    l = int(rng.integers(pop.N - 1))
    if l >= s:
        l += 1
    u = float(rng.random())
    counts = list(pop.counts)
    _speak_and_listen(counts, pop.nz_a, pop.params.K, s, l, u)
    return Population(pop.params, pop.N, tuple(counts), pop.nz_a, pop.nz_b)


def simulate(
    params: ModelParams,
    N: int,
    sweeps: float,
    record_every: float = 0.1,
    seed: int = 0,
    init: str = "uniform",
    record_counts: bool = False,
) -> Trajectory:
    """Run ceil(sweeps * N) conversations, recording m on a sweep cadence.

    Records land at conversation counts round(k * record_every * N) for
    k = 0, 1, 2, ...; duplicates collapse at small N.
    """
    if sweeps < 0:
        raise ValueError("sweeps must be nonnegative")
    if record_every <= 0:
        raise ValueError("record_every must be positive")
    pop = init_population(params, N, init)
    n_conv = math.ceil(sweeps * N)

    marks = []
    k = 0
    while True:
        c = round(k * record_every * N)
        if c > n_conv:
            break
        if not marks or c > marks[-1]:
            marks.append(c)
        k += 1

    rng = np.random.default_rng(seed)
    counts = list(pop.counts)
    K = params.K
    weighted = sum(i * c for i, c in enumerate(counts))
    base = K * pop.nz_a
    denom = K * N

    times, ms = [], []
    snaps = [] if record_counts else None
    next_i = 0
    if marks and marks[0] == 0:
        times.append(0.0)
        ms.append((weighted + base) / denom)
        if record_counts:
            snaps.append(list(counts))
        next_i = 1
    integers, random = rng.integers, rng.random
    for c in range(1, n_conv + 1):
        s = int(integers(N))
        l = int(integers(N - 1))
        if l >= s:
            l += 1
        weighted += _speak_and_listen(counts, pop.nz_a, K, s, l, float(random()))
        if next_i < len(marks) and c == marks[next_i]:
            times.append(c / N)
            ms.append((weighted + base) / denom)
            if record_counts:
                snaps.append(list(counts))
            next_i += 1

    return Trajectory(
        np.array(times),
        np.array(ms),
        np.array(snaps, dtype=int) if record_counts else None,
    )


def absorption_time(params: ModelParams, N: int, init: str, seed: int, max_conversations: int) -> int | None:
    """Conversations until every normal agent reaches the zealots' state.

    Requires exactly one zealot species, the setting where consensus at
    the zealots' opinion is the unique absorbing state: with B-zealots the
    target is all normals at state 0, mirrored for A-zealots.  Returns
    None if max_conversations elapse first.
    """
    has_a, has_b = params.z_a > 0, params.z_b > 0
    if has_a == has_b:
        raise ValueError("absorption needs exactly one zealot species")
    pop = init_population(params, N, init)
    K = params.K
    target = 0 if has_b else K
    n_norm = sum(pop.counts)

    counts = list(pop.counts)
    if counts[target] == n_norm:
        return 0
    rng = np.random.default_rng(seed)
    integers, random = rng.integers, rng.random
    for c in range(1, max_conversations + 1):
        s = int(integers(N))
        l = int(integers(N - 1))
        if l >= s:
            l += 1
        _speak_and_listen(counts, pop.nz_a, K, s, l, float(random()))
        if counts[target] == n_norm:
            return c
    return None
