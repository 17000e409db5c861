"""Fixed points, stability, and bifurcation structure of the mean field.

Every fixed point of the flux system is a geometric distribution whose
parameter m solves the self-consistency condition

    g(m) = alpha * induced_normal_magnetization(m, K) + z_A - m = 0,

so root-finding on the scalar g replaces any vector solve.  g(0) = z_A and
g(1) = -z_B, which is why the consensus endpoints are fixed points exactly
when the opposing zealot fraction vanishes.

Stability is judged by the eigenvalues of the Jacobian of the reduced
system (rho_0 eliminated via conservation), with the seeded perturbation
experiment kept as an independent trajectory-level cross-check.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import BranchMissingError, SolverFailureError
from .model import (
    Distribution,
    ModelParams,
    _raw_derivative,
    geometric_distribution,
    induced_normal_magnetization,
    integrate,
    magnetization,
)

__all__ = [
    "SteadyState",
    "SteadyStateSet",
    "Axis",
    "SweepGrid",
    "PerturbationRecord",
    "ZealotDensity",
    "self_consistency_residual",
    "find_steady_states",
    "classify_stability",
    "zealot_density_for_steady",
    "rho_b_curve",
    "critical_unilateral_zealot_fraction",
    "critical_alpha",
    "cusp_zealot_fraction",
    "beak_diagram",
    "symmetric_gap_curve",
    "symmetric_tipping_threshold",
    "perturbation_experiment",
]

# Eigenvalues within this band of zero are called marginal; it separates the
# genuinely neutral K=1 case from finite-difference noise (~1e-10).
MARGINAL_BAND = 1e-7
# A classified state must satisfy the self-consistency condition this well.
RESIDUAL_PRECHECK = 1e-8
_JACOBIAN_STEP = 1e-6
_BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class SteadyState:
    """A self-consistent fixed point with its stability verdict."""

    m: float
    dist: Distribution
    stability: str  # stable | unstable | marginal
    leading_eigenvalue: float


@dataclass(frozen=True)
class SteadyStateSet:
    """Steady states sorted by m, plus the K=1 degeneracy marker.

    With K = 1 and no zealots every geometric distribution is a fixed point
    (the dynamics is a martingale), so instead of an arbitrary enumeration
    the set is empty and `continuum` is True.
    """

    params: ModelParams
    states: tuple[SteadyState, ...]
    continuum: bool = False

    def __iter__(self):
        return iter(self.states)

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]

    def magnetizations(self) -> np.ndarray:
        return np.array([s.m for s in self.states])

    def n_stable(self) -> int:
        return sum(1 for s in self.states if s.stability == "stable")


@dataclass(frozen=True)
class Axis:
    """Uniform sweep axis: values lo, lo+res, ..., hi."""

    name: str
    lo: float
    hi: float
    res: float

    def values(self) -> np.ndarray:
        n = int(round((self.hi - self.lo) / self.res)) + 1
        return self.lo + self.res * np.arange(n)


@dataclass(frozen=True)
class SweepGrid:
    """Rectangular sweep result: one table entry per grid cell per quantity."""

    axes: tuple[Axis, ...]
    tables: dict[str, np.ndarray]

    def __post_init__(self):
        shape = tuple(len(ax.values()) for ax in self.axes)
        for name, arr in self.tables.items():
            if arr.shape != shape:
                raise ValueError(f"table {name!r} has shape {arr.shape}, grid is {shape}")
            arr.flags.writeable = False


@dataclass(frozen=True)
class PerturbationRecord:
    """Distance-to-reference time series of one seeded perturbation run."""

    times: np.ndarray
    d: np.ndarray
    verdict: str  # grew | decayed | inconclusive
    eps: float

    def __post_init__(self):
        if abs(self.d[0] - self.eps) > 1e-12:
            raise ValueError("initial distance must equal the requested magnitude")


class ZealotDensity(NamedTuple):
    """Signed unilateral zealot fraction; valid only where it is a density."""

    rho_b: float
    valid: bool


def self_consistency_residual(m, params: ModelParams):
    """g(m) = alpha * induced_normal_magnetization(m, K) + z_A - m.

    Zero exactly at the fixed points of the mean field.  Accepts a scalar
    or an array of m values.
    """
    return params.alpha * induced_normal_magnetization(m, params.K) + params.z_a - m


def _bisect_residual(a: float, b: float, ga: float, gb: float, params: ModelParams, tol: float) -> float:
    # Standard bisection on g, but the stop test is |g| < tol rather than
    # interval width: the steady-state CSV promises residuals below tol.
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (a + b)
        gm = self_consistency_residual(mid, params)
        if abs(gm) < tol:
            return mid
        if (ga < 0) != (gm < 0):
            b, gb = mid, gm
        else:
            a, ga = mid, gm
    raise SolverFailureError(f"bisection stalled on [{a!r}, {b!r}] with tol {tol:g}")


def _scan_roots(params: ModelParams, scan_points: int, tol: float) -> list[float]:
    ms = np.linspace(0.0, 1.0, scan_points)
    g = self_consistency_residual(ms, params)

    roots = []
    if params.z_a == 0.0:
        roots.append(0.0)
    if params.z_b == 0.0:
        roots.append(1.0)

    # Exact zeros at scan points are roots outright; adjacent cells are then
    # excluded from the sign-change sweep so they are not found twice.
    zero_idx = np.flatnonzero(g == 0.0)
    for i in zero_idx:
        if ms[i] not in roots:
            roots.append(float(ms[i]))

    # Endpoint roots are added by the zealot condition above, not by chasing
    # the +-1 ulp values g takes there in floating point; skip those cells.
    lo_cell = 1 if params.z_a == 0.0 else 0
    hi_cell = scan_points - 2 if params.z_b == 0.0 else scan_points - 1
    skip = set(zero_idx) | set(zero_idx - 1)
    for i in range(lo_cell, hi_cell):
        if i in skip or g[i] == 0.0 or g[i + 1] == 0.0:
            continue
        if (g[i] < 0) != (g[i + 1] < 0):
            roots.append(_bisect_residual(float(ms[i]), float(ms[i + 1]), float(g[i]), float(g[i + 1]), params, tol))

    roots.sort()
    # Brackets straddling one root through ulp noise converge to points a
    # residual-band apart (~tol/|g'|); below 1e-8 they are the same root.
    dedup = []
    for r in roots:
        if not dedup or r - dedup[-1] > 1e-8:
            dedup.append(r)
    return dedup


def find_steady_states(params: ModelParams, scan_points: int = 2001, tol: float = 1e-10) -> SteadyStateSet:
    """All fixed points, sorted by m and classified for stability.

    A uniform scan of g over [0, 1] is bisected at each sign change down to
    |g| < tol; consensus endpoints enter by the g(0) = z_A, g(1) = -z_B
    rule.  If two roots land within 2 scan cells of each other (near the
    fold of the beak), the scan is repeated 10x finer.  Root counts are
    generically 1 or 3.
    """
    if params.K == 1 and params.z_a == 0.0 and params.z_b == 0.0:
        return SteadyStateSet(params, (), continuum=True)

    roots = _scan_roots(params, scan_points, tol)
    cell = 1.0 / (scan_points - 1)
    if any(b - a < 2.0 * cell for a, b in zip(roots, roots[1:])):
        roots = _scan_roots(params, (scan_points - 1) * 10 + 1, tol)

    states = []
    for r in roots:
        dist = geometric_distribution(r, params)
        stability, lead = classify_stability(dist)
        states.append(SteadyState(r, dist, stability, lead))
    return SteadyStateSet(params, tuple(states))


def classify_stability(dist: Distribution) -> tuple[str, float]:
    """Stability of a fixed point from the reduced Jacobian spectrum.

    Conservation eliminates rho_0 = alpha - sum(rho_1..rho_K); the K x K
    Jacobian of the remaining system is built by central differences and
    the verdict keys off the largest eigenvalue real part: below -1e-7
    stable, above +1e-7 unstable, otherwise marginal.
    """
    params = dist.params
    K = params.K
    m = magnetization(dist)
    if abs(self_consistency_residual(m, params)) > RESIDUAL_PRECHECK:
        raise ValueError("classify_stability needs a fixed point (residual above 1e-8)")

    def reduced(u: np.ndarray) -> np.ndarray:
        rho = np.empty(K + 1)
        rho[0] = params.alpha - u.sum()
        rho[1:] = u
        return _raw_derivative(rho, params)[1:]

    u0 = dist.rho[1:].copy()
    h = _JACOBIAN_STEP
    jac = np.empty((K, K))
    for j in range(K):
        up = u0.copy()
        dn = u0.copy()
        up[j] += h
        dn[j] -= h
        jac[:, j] = (reduced(up) - reduced(dn)) / (2.0 * h)

    lead = float(np.max(np.linalg.eigvals(jac).real))
    if lead < -MARGINAL_BAND:
        return "stable", lead
    if lead > MARGINAL_BAND:
        return "unstable", lead
    return "marginal", lead


def zealot_density_for_steady(m: float, K: int) -> ZealotDensity:
    """B-zealot fraction that makes the geometric state at m a fixed point.

    From m = (1 - rho_B) * m_normal: rho_B = (m_normal - m) / m_normal with
    m_normal the induced normal magnetization.  The signed value is returned
    with a validity flag; it is a genuine density only for m in [0.5, 1).
    """
    if not 0.0 < m < 1.0:
        raise ValueError("m must lie strictly between 0 and 1")
    mn = induced_normal_magnetization(m, K)
    return ZealotDensity((mn - m) / mn, m >= 0.5)


def rho_b_curve(K: int, points: int = 500) -> np.ndarray:
    """Table of (m, rho_B) on the open interval (0.5, 1); shape (points, 2).

    The curve rises from 0, peaks at the critical zealot fraction, and
    falls back to 0 at consensus.
    """
    if points < 3:
        raise ValueError("points must be >= 3")
    ms = np.linspace(0.5, 1.0, points + 2)[1:-1]
    mn = induced_normal_magnetization(ms, K)
    return np.column_stack([ms, (mn - ms) / mn])


def critical_unilateral_zealot_fraction(K: int, tol: float = 1e-9) -> tuple[float, float]:
    """Maximum of the rho_B(m) curve: the most B-zealots any steady state
    short of consensus can carry.  Returns (rho_B*, m*).

    A 1001-point scan brackets the peak, golden-section search narrows the
    bracket to tol.
    """
    if K < 2:
        raise ValueError("K must be >= 2: for K = 1 the curve is identically 0")

    def f(m: float) -> float:
        mn = induced_normal_magnetization(m, K)
        return (mn - m) / mn

    ms = np.linspace(0.5, 1.0, 1001)
    mn = induced_normal_magnetization(ms, K)
    i = int(np.argmax((mn - ms) / mn))
    a, b = float(ms[max(i - 1, 0)]), float(ms[min(i + 1, 1000)])

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    m_star = 0.5 * (a + b)
    return f(m_star), m_star


def critical_alpha(K: int) -> float:
    """Normal fraction below which the balanced state becomes stable: 3/(K+2)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return 3.0 / (K + 2)


def cusp_zealot_fraction(K: int) -> float:
    """Per-side zealot fraction at the beak cusp: (1 - 3/(K+2))/2 = (K-1)/(2(K+2))."""
    return (K - 1) / (2.0 * (K + 2))


def _beak_row(args) -> tuple[list[int], list[int]]:
    K, z_a, zs, scan_points, tol = args
    n_steady = []
    n_stable = []
    for z_b in zs:
        if z_a + z_b >= 1.0:
            # no normals left: cell is out of the model's domain, recorded as 0
            n_steady.append(0)
            n_stable.append(0)
            continue
        ss = find_steady_states(ModelParams(K, float(z_a), float(z_b)), scan_points, tol)
        n_steady.append(len(ss))
        n_stable.append(ss.n_stable())
    return n_steady, n_stable


def beak_diagram(K: int, res: float = 0.005, max_z: float = 0.5, jobs: int = 1) -> SweepGrid:
    """Steady-state counts over the (z_A, z_B) plane.

    Each in-domain cell records the number of steady states and how many
    are stable; the multi-state region forms the beak with its cusp on the
    diagonal at (K-1)/(2(K+2)) per side.  Cells with z_A + z_B >= 1 hold 0.
    Rows are independent, so `jobs` workers split them; the assembled grid
    is identical for any job count.
    """
    if not 0.0 < res <= max_z:
        raise ValueError("need 0 < res <= max_z")
    ax = Axis("z_a", 0.0, res * int(round(max_z / res)), res)
    zs = ax.values()
    args = [(K, float(z_a), zs, 2001, 1e-10) for z_a in zs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_beak_row, args, chunksize=max(1, len(args) // (4 * jobs))))
    else:
        rows = [_beak_row(a) for a in args]
    n_steady = np.array([r[0] for r in rows], dtype=int)
    n_stable = np.array([r[1] for r in rows], dtype=int)
    return SweepGrid((ax, Axis("z_b", ax.lo, ax.hi, ax.res)), {"n_steady": n_steady, "n_stable": n_stable})


def _gap_cell(args) -> float:
    K, z = args
    ss = find_steady_states(ModelParams(K, float(z), float(z)))
    if ss.continuum:
        return 1.0  # fixed points fill [0, 1]
    ms = ss.magnetizations()
    return float(ms.max() - ms.min())


def symmetric_gap_curve(K: int, res: float = 0.005, jobs: int = 1) -> SweepGrid:
    """Spread of steady-state magnetizations along the diagonal z_A = z_B = z.

    gap(z) = max m - min m over the steady states; it is 0 once only the
    balanced state survives (z past the cusp) and drops steeply, square-root
    fashion, as the cusp is approached from below.  z runs over [0, 0.5).
    """
    if not 0.0 < res < 0.5:
        raise ValueError("need 0 < res < 0.5")
    n = int(math.ceil(0.5 / res - 1e-12))
    ax = Axis("z", 0.0, res * (n - 1), res)
    zs = ax.values()
    args = [(K, float(z)) for z in zs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            gaps = list(pool.map(_gap_cell, args, chunksize=max(1, len(args) // (4 * jobs))))
    else:
        gaps = [_gap_cell(a) for a in args]
    return SweepGrid((ax,), {"gap": np.array(gaps)})


def symmetric_tipping_threshold(K: int, tol: float = 2e-5) -> float:
    """Smallest symmetric zealot fraction that stabilizes the balanced state.

    Bisection on the classify_stability verdict of the m = 0.5 fixed point
    (marginal counts as no longer unstable).  Matches (K-1)/(2(K+2)).
    """
    if K < 2:
        raise ValueError("K must be >= 2: at K = 1 the balanced state is never unstable")

    def unstable(z: float) -> bool:
        params = ModelParams(K, z, z)
        verdict, _ = classify_stability(geometric_distribution(0.5, params))
        return verdict == "unstable"

    lo, hi = 0.0, 0.499
    if not unstable(lo) or unstable(hi):
        raise SolverFailureError("no stability flip bracketed on [0, 0.499]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if unstable(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _branch_state(ss: SteadyStateSet, branch: str) -> SteadyState:
    if len(ss) == 0:
        raise BranchMissingError("no steady states at these parameters")
    if branch == "low":
        return ss[0]
    if branch == "high":
        return ss[-1]
    if branch == "mid":
        if len(ss) < 3:
            raise BranchMissingError(f"mid branch needs 3 steady states, found {len(ss)}")
        return ss[len(ss) // 2]
    raise ValueError(f"unknown branch {branch!r}")


def perturbation_experiment(
    params: ModelParams,
    branch: str,
    eps: float = 1e-6,
    t_end: float = 50.0,
    seed: int = 0,
) -> PerturbationRecord:
    """Kick a steady state by a random zero-sum vector of length eps and
    integrate; the recorded Euclidean distance decides the verdict.

    The perturbed point is projected onto the density simplex (negative
    entries clipped to 0, the excess taken from the largest entry) and
    rescaled so the initial distance is exactly eps.  Verdict: grew if
    d(t_end) > 10 eps, decayed if d(t_end) < eps/10, else inconclusive.
    """
    if not 0.0 < eps <= 1e-3:
        raise ValueError("eps must lie in (0, 1e-3]")
    ss = find_steady_states(params)
    if ss.continuum:
        raise BranchMissingError("fixed points form a continuum; no isolated branch to perturb")
    state = _branch_state(ss, branch)
    ref = state.dist.rho

    rng = np.random.default_rng(seed)
    dev = np.zeros(params.K + 1)
    for _ in range(100):
        norm = float(np.linalg.norm(dev))
        if norm <= eps * 1e-9:
            # degenerate direction (or first pass): clipping at a consensus
            # corner can wipe the whole kick, so draw again
            dev = rng.standard_normal(params.K + 1)
            dev -= dev.mean()
            continue
        dev *= eps / norm
        p = ref + dev
        if p.min() >= 0.0:
            break
        neg = p < 0.0
        excess = -p[neg].sum()
        p[neg] = 0.0
        p[np.argmax(p)] -= excess
        dev = p - ref
    else:
        raise SolverFailureError("simplex projection of the perturbation did not settle")

    traj = integrate(Distribution(params, p), t_end)
    d = np.linalg.norm(traj.rho - ref, axis=1)
    if d[-1] > 10.0 * eps:
        verdict = "grew"
    elif d[-1] < 0.1 * eps:
        verdict = "decayed"
    else:
        verdict = "inconclusive"
    return PerturbationRecord(traj.times, d, verdict, eps)
