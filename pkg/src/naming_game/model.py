"""Mean-field dynamics of the K-state naming game with zealots.

Normal agents occupy opinion states 0..K, where state 0 is full commitment
to opinion B and state K full commitment to opinion A.  A speaker in state i
voices A with probability i/K; a normal listener moves one state toward the
opinion it hears.  Zealots are pinned at the extremes (A-zealots at K,
B-zealots at 0), speak like everyone else, and never move.

Densities here are fractions of the *whole* population, so the mobile
densities rho_0..rho_K sum to alpha = 1 - z_A - z_B.  That convention makes

    m = alpha * m_normal + z_A

an exact identity between the poll expectation m and the normal-agent
magnetization m_normal.

Time is measured in sweeps: one sweep = N conversations, which turns the
per-conversation expected update into the N-independent flux system

    drho_i/dt = m * rho_{i-1} + (1 - m) * rho_{i+1} - rho_i

with the obvious one-sided forms at states 0 and K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePopulationError, NumericalFailureError, UndefinedRatioError

__all__ = [
    "ModelParams",
    "Distribution",
    "PerturbationVector",
    "DerivativeVector",
    "MeanFieldTrajectory",
    "magnetization",
    "normal_magnetization",
    "geometric_distribution",
    "induced_normal_magnetization",
    "mean_field_derivative",
    "expected_dmdt",
    "discrete_update_map",
    "integrate",
    "magnetization_norm",
    "min_adjacent_ratio",
]

# Tolerances: construction checks at 1e-12, exact identities at 1e-14,
# integration positivity floor at -1e-9.  Comfortable for K up to 64.
SUM_TOL = 1e-12
NEGATIVE_FLOOR = -1e-9


@dataclass(frozen=True)
class ModelParams:
    """Fixed context of an experiment: K opinion steps and zealot fractions."""

    K: int
    z_a: float = 0.0
    z_b: float = 0.0

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be an integer >= 1, got {self.K}")
        object.__setattr__(self, "K", int(self.K))
        if self.z_a < 0 or self.z_b < 0:
            raise ValueError("zealot fractions must be nonnegative")
        if self.z_a + self.z_b >= 1:
            raise ValueError("z_a + z_b must be < 1: at least one normal agent")
        if self.alpha <= 0:
            raise ValueError("normal fraction must be positive")

    @property
    def alpha(self) -> float:
        """Normal-agent fraction, always exactly 1 - z_a - z_b."""
        return 1.0 - self.z_a - self.z_b


@dataclass(frozen=True)
class Distribution:
    """Mean-field state: densities of normal agents per opinion state.

    rho has K+1 entries and sums to params.alpha; zealots are carried in
    params, not in rho.
    """

    params: ModelParams
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float).copy()
        if rho.shape != (self.params.K + 1,):
            raise ValueError(f"rho must have length K+1 = {self.params.K + 1}")
        if np.any(rho < 0):
            raise ValueError("densities must be nonnegative")
        if abs(rho.sum() - self.params.alpha) > SUM_TOL:
            raise ValueError("densities must sum to the normal fraction alpha")
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)


@dataclass(frozen=True)
class PerturbationVector:
    """Signed deviation from a reference Distribution; components sum to 0."""

    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).copy()
        if x.ndim != 1 or x.size < 2:
            raise ValueError("perturbation must be a vector of length K+1 >= 2")
        if abs(x.sum()) > SUM_TOL:
            raise ValueError("perturbation components must sum to 0")
        x.flags.writeable = False
        object.__setattr__(self, "x", x)


@dataclass(frozen=True)
class DerivativeVector:
    """Rates drho_i/dt in sweep time; conservation forces a zero sum."""

    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float).copy()
        if abs(d.sum()) > SUM_TOL:
            raise ValueError("derivative components must sum to 0")
        d.flags.writeable = False
        object.__setattr__(self, "d", d)


def magnetization(dist: Distribution) -> float:
    """Expected poll result: sum_i (i/K) rho_i plus the A-zealot mass.

    Always in [0, 1]; the dot product can overshoot a consensus value by an
    ulp, so the result is clamped to keep that contract.
    """
    K = dist.params.K
    m = float(np.dot(np.arange(K + 1), dist.rho) / K + dist.params.z_a)
    return min(1.0, max(0.0, m))


def normal_magnetization(dist: Distribution) -> float:
    """Magnetization of the normal agents alone: sum_i i rho_i / (K alpha)."""
    alpha = dist.params.alpha
    if alpha <= 0:
        raise DegeneratePopulationError("no normal agents")
    K = dist.params.K
    return float(np.dot(np.arange(K + 1), dist.rho) / (K * alpha))


def _raw_magnetization(rho: np.ndarray, params: ModelParams) -> float:
    # Same as magnetization() but for unvalidated arrays (finite differencing
    # and integration need to evaluate slightly off the simplex).
    return float(np.dot(np.arange(params.K + 1), rho) / params.K + params.z_a)


def _geometric_weights(m: float, K: int) -> np.ndarray:
    """Unnormalized weights proportional to r^i with r = m/(1-m).

    Built from the side of the smaller ratio so no power can overflow:
    q = min(m, 1-m)/max(m, 1-m) <= 1, and w_i = q^i (m <= 0.5) or
    w_i = q^(K-i) (m > 0.5).  m = 0 and m = 1 come out as point masses,
    matching the consensus limits.
    """
    q = min(m, 1.0 - m) / max(m, 1.0 - m)
    w = np.empty(K + 1)
    acc = 1.0
    if m <= 0.5:
        for i in range(K + 1):
            w[i] = acc
            acc *= q
    else:
        for i in range(K, -1, -1):
            w[i] = acc
            acc *= q
    return w


def geometric_distribution(m: float, params: ModelParams) -> Distribution:
    """The unique steady-state-shaped distribution with parameter m.

    Normal densities are proportional to r^i with constant adjacent ratio
    r = m/(1-m), scaled to total mass alpha.  m = 0 and m = 1 are treated
    as the consensus limits (all mass at state 0 or K).
    """
    if not 0.0 <= m <= 1.0:
        raise ValueError("m must lie in [0, 1]")
    w = _geometric_weights(m, params.K)
    return Distribution(params, params.alpha * w / w.sum())


def induced_normal_magnetization(m, K: int):
    """Normal magnetization of the geometric distribution generated by m.

    Equals m at 0, 0.5 and 1.  For K >= 2 it exceeds m on (0.5, 1) and
    falls below it on (0, 0.5); for K = 1 it is identically m, which is
    why every geometric state is steady in the voter case.

    Accepts a scalar or an ndarray of m values.
    """
    if isinstance(m, np.ndarray):
        return _induced_vec(m, K)
    if not 0.0 <= m <= 1.0:
        raise ValueError("m must lie in [0, 1]")
    q = min(m, 1.0 - m) / max(m, 1.0 - m)
    s0 = 0.0
    s1 = 0.0
    w = 1.0
    for i in range(K + 1):
        s0 += w
        s1 += i * w
        w *= q
    if m > 0.5:
        # weights were mirrored: w_i = q^(K-i), so reuse s1 via i -> K-i
        s1 = K * s0 - s1
    return s1 / (K * s0)


def _induced_vec(m: np.ndarray, K: int) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if np.any((m < 0) | (m > 1)):
        raise ValueError("m must lie in [0, 1]")
    lo = np.minimum(m, 1.0 - m)
    hi = np.maximum(m, 1.0 - m)
    q = lo / np.where(hi > 0, hi, 1.0)
    i = np.arange(K + 1)
    w = q[..., None] ** i
    s0 = w.sum(axis=-1)
    s1 = w @ i
    s1 = np.where(m <= 0.5, s1, K * s0 - s1)
    return s1 / (K * s0)


def _raw_derivative(rho: np.ndarray, params: ModelParams) -> np.ndarray:
    """Flux system drho/dt on a raw density array (no simplex validation)."""
    K = params.K
    m = _raw_magnetization(rho, params)
    d = np.empty(K + 1)
    d[0] = -m * rho[0] + (1.0 - m) * rho[1]
    if K >= 2:
        d[1:K] = m * rho[0 : K - 1] + (1.0 - m) * rho[2 : K + 1] - rho[1:K]
    d[K] = m * rho[K - 1] - (1.0 - m) * rho[K]
    return d


def mean_field_derivative(dist: Distribution) -> DerivativeVector:
    """Expected density rates per sweep.

    Up-flux from state i is m*rho_i, down-flux (1-m)*rho_i; zealots never
    move and enter only through m.  Components sum to zero.
    """
    return DerivativeVector(_raw_derivative(dist.rho, dist.params))


def expected_dmdt(dist: Distribution) -> float:
    """Rate of change of the magnetization, (1/K) sum_i i * drho_i/dt.

    Closed form: [m (alpha - rho_K) - (1 - m) (alpha - rho_0)] / K.
    """
    K = dist.params.K
    alpha = dist.params.alpha
    m = magnetization(dist)
    return (m * (alpha - dist.rho[K]) - (1.0 - m) * (alpha - dist.rho[0])) / K


def discrete_update_map(dist: Distribution, N: int) -> Distribution:
    """Expected distribution after one conversation among N agents.

    Identical to dist + (1/N) * mean_field_derivative(dist), which expands
    to rho_i (N-1)/N + rho_{i-1} m/N + rho_{i+1} (1-m)/N in the interior
    with boundary factors (N-m)/N and (N-1+m)/N.
    """
    if int(N) != N or N < 1:
        raise ValueError("N must be an integer >= 1")
    return Distribution(dist.params, dist.rho + _raw_derivative(dist.rho, dist.params) / N)


@dataclass(frozen=True)
class MeanFieldTrajectory:
    """Densities recorded at fixed time steps of the mean-field flow."""

    params: ModelParams
    times: np.ndarray
    rho: np.ndarray  # shape (len(times), K+1)

    def magnetizations(self) -> np.ndarray:
        K = self.params.K
        return np.clip(self.rho @ np.arange(K + 1) / K + self.params.z_a, 0.0, 1.0)

    def distribution(self, idx: int) -> Distribution:
        return Distribution(self.params, self.rho[idx])


def integrate(dist0: Distribution, t_end: float, step: float = 0.01) -> MeanFieldTrajectory:
    """Fixed-step RK4 integration of the flux system in sweep time.

    Records the state at every multiple of `step`.  Each step must conserve
    total density to 1e-12 (then gets renormalized); any density dipping
    below -1e-9 aborts with NumericalFailureError, smaller undershoots are
    clipped to zero.
    """
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    if step <= 0:
        raise ValueError("step must be positive")
    params = dist0.params
    alpha = params.alpha
    n_steps = max(0, math.ceil(t_end / step - 1e-9))
    out = np.empty((n_steps + 1, params.K + 1))
    out[0] = dist0.rho
    u = dist0.rho.copy()
    for n in range(n_steps):
        k1 = _raw_derivative(u, params)
        k2 = _raw_derivative(u + 0.5 * step * k1, params)
        k3 = _raw_derivative(u + 0.5 * step * k2, params)
        k4 = _raw_derivative(u + step * k3, params)
        u = u + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if u.min() < NEGATIVE_FLOOR:
            raise NumericalFailureError(
                f"density {u.min():.3e} below {NEGATIVE_FLOOR} at t={(n + 1) * step:g}"
            )
        if abs(u.sum() - alpha) > SUM_TOL:
            raise NumericalFailureError(
                f"conservation drift {abs(u.sum() - alpha):.3e} exceeds {SUM_TOL} per step"
            )
        np.clip(u, 0.0, None, out=u)
        u *= alpha / u.sum()
        out[n + 1] = u
    times = np.arange(n_steps + 1) * step
    return MeanFieldTrajectory(params, times, out)


def magnetization_norm(x) -> float:
    """Weighted 1-norm (1/K)(|x_1| + 2|x_2| + ... + K|x_K|).

    Component 0 carries weight zero, so this is a norm on the reduced
    coordinates x_1..x_K.  On a realizable density sequence it equals the
    normals' magnetization contribution.
    """
    arr = np.asarray(getattr(x, "x", x), dtype=float)
    K = arr.size - 1
    if K < 1:
        raise ValueError("sequence must have length K+1 >= 2")
    return float(np.dot(np.arange(K + 1), np.abs(arr)) / K)


def min_adjacent_ratio(dist: Distribution) -> float:
    """Minimum over i of rho_{i+1}/rho_i; requires strictly positive densities."""
    rho = dist.rho
    if np.any(rho <= 0):
        raise UndefinedRatioError("adjacent ratios undefined: some density is zero")
    return float(np.min(rho[1:] / rho[:-1]))
