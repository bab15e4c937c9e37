"""Observables: transverse-noise moments, squeezing parameter, shot sampling.

The mean spin points along y throughout; squeezing lives in the transverse
(z, x) plane probed by J_theta = cos(theta) Jz + sin(theta) Jx. The Ramsey
gain is xi^2 = N min_theta Var(J_theta) / <Jy>^2, which equals 1 for any
coherent product state and is bounded below by 2 / (2 + N) for all states.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from math import atan2, hypot, log10, pi

import numpy as np
from scipy.linalg import eigh

from .operators import apply_global_rotation, collective_expectations

__all__ = [
    "MomentSummary",
    "SqueezingRecord",
    "ShotSet",
    "ShotStats",
    "BoundViolationError",
    "moment_summary",
    "var_along",
    "theta_star",
    "ThetaStar",
    "xi_squared_floor",
    "record_from_moments",
    "squeezing_record",
    "sample_shots",
    "shot_statistics",
    "shotset_to_csv",
    "shotset_from_csv",
    "sm_depth_bound",
    "sm_bound_value",
]

_DEGENERACY_RTOL = 1e-12


class BoundViolationError(ValueError):
    """A computed squeezing parameter fell below the quantum floor 2/(2+N)."""


@dataclass(frozen=True)
class MomentSummary:
    """First and second collective-spin moments in the y / (z, x) frame.

    ``cov_xz`` is the symmetrized covariance <{Jx, Jz}>/2 - <Jx><Jz>.
    """

    mean_x: float
    mean_y: float
    mean_z: float
    var_x: float
    var_z: float
    cov_xz: float

    def __post_init__(self):
        if self.var_x < 0 or self.var_z < 0:
            raise ValueError("negative variance")
        bound = np.sqrt(self.var_x * self.var_z) + 1e-12
        if abs(self.cov_xz) > bound:
            raise ValueError("covariance exceeds Cauchy-Schwarz bound")


@dataclass(frozen=True)
class SqueezingRecord:
    """One row of squeezing analysis at a fixed evolution time."""

    t_us: float
    mean_spin: float     # |<Jy>|
    theta_star: float    # radians, in (-pi/2, pi/2]
    min_var: float
    xi2: float
    xi2_db: float
    collapsed: bool = False  # mean spin below resolution, xi2 meaningless


@dataclass
class ShotSet:
    """Projective measurement outcomes, one row per shot, +-1 per atom."""

    outcomes: np.ndarray
    theta: float = 0.0
    t_us: float = 0.0
    seed: int | None = None
    basis: str = "variance"

    def __post_init__(self):
        out = np.asarray(self.outcomes, dtype=np.int8)
        if out.ndim != 2:
            raise ValueError("outcomes must be a (shots, atoms) matrix")
        if not np.all(np.isin(out, (-1, 1))):
            raise ValueError("outcomes must be +-1")
        self.outcomes = out

    @property
    def n_shots(self) -> int:
        return self.outcomes.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.outcomes.shape[1]

    def j_values(self) -> np.ndarray:
        """Collective J_theta value, one per shot."""
        return 0.5 * self.outcomes.sum(axis=1)


@dataclass(frozen=True)
class ShotStats:
    mean: float
    variance: float
    se_mean: float
    se_variance: float
    n_shots: int
    resamples: int


@dataclass(frozen=True)
class ThetaStar:
    theta: float
    min_var: float
    degenerate: bool = False

    def __iter__(self):
        yield self.theta
        yield self.min_var


def moment_summary(v: np.ndarray) -> MomentSummary:
    """Exact moments of a normalized state vector."""
    jx, jy, jz, jx2, jz2, cross = collective_expectations(v)
    return MomentSummary(
        mean_x=jx,
        mean_y=jy,
        mean_z=jz,
        var_x=max(jx2 - jx * jx, 0.0),
        var_z=max(jz2 - jz * jz, 0.0),
        cov_xz=cross - jx * jz,
    )


def var_along(m: MomentSummary, theta: float) -> float:
    """Var(J_theta) = cos^2 var_z + sin^2 var_x + 2 sin cos cov_xz."""
    c, s = np.cos(theta), np.sin(theta)
    return c * c * m.var_z + s * s * m.var_x + 2.0 * s * c * m.cov_xz


def theta_star(m: MomentSummary) -> ThetaStar:
    """Closed-form minimizer of Var(J_theta) over theta in (-pi/2, pi/2].

    Var(J_theta) is a period-pi sinusoid; the minimum sits at
    theta = atan2(2 cov, var_z - var_x)/2 + pi/2 with value
    (var_z + var_x)/2 - sqrt((var_z - var_x)^2 + 4 cov^2)/2.
    A rotationally symmetric distribution has no preferred angle and is
    reported as theta = 0 with the degenerate flag set.
    """
    a = m.var_z - m.var_x
    b = 2.0 * m.cov_xz
    r = hypot(a, b)
    mean_var = 0.5 * (m.var_z + m.var_x)
    if r <= _DEGENERACY_RTOL * max(1.0, m.var_z + m.var_x):
        return ThetaStar(theta=0.0, min_var=mean_var, degenerate=True)
    theta = 0.5 * atan2(b, a) + 0.5 * pi
    theta = (theta + 0.5 * pi) % pi - 0.5 * pi
    if theta <= -0.5 * pi + 1e-15:
        theta = 0.5 * pi
    return ThetaStar(theta=theta, min_var=mean_var - 0.5 * r)


def xi_squared_floor(n: int) -> float:
    """Quantum floor of the squeezing parameter for N spins."""
    return 2.0 / (2.0 + n)


def record_from_moments(m: MomentSummary, n: int, t_us: float) -> SqueezingRecord:
    """Squeezing record from exact moments; enforces the quantum floor."""
    ts = theta_star(m)
    mean_spin = abs(m.mean_y)
    if m.mean_y**2 < 1e-12 * (0.5 * n) ** 2:
        return SqueezingRecord(t_us, mean_spin, ts.theta, ts.min_var,
                               xi2=np.inf, xi2_db=np.inf, collapsed=True)
    xi2 = n * ts.min_var / (m.mean_y**2)
    floor = xi_squared_floor(n)
    if xi2 < floor * (1.0 - 1e-9):
        raise BoundViolationError(f"xi^2 = {xi2:.6g} below quantum floor {floor:.6g}")
    return SqueezingRecord(t_us, mean_spin, ts.theta, ts.min_var,
                           xi2=xi2, xi2_db=10.0 * log10(xi2))


def squeezing_record(v: np.ndarray, t_us: float) -> SqueezingRecord:
    """Exact-moments squeezing analysis of a state vector."""
    m = moment_summary(v)
    n = int(round(np.log2(np.asarray(v).size)))
    return record_from_moments(m, n, t_us)


def _analysis_rotation(v: np.ndarray, theta: float, basis: str) -> np.ndarray:
    if basis == "variance":
        # -theta about y maps J_theta onto Jz before the projective z readout
        return apply_global_rotation(v, 0.5 * pi, -theta)
    if basis == "spin_length":
        # +pi/2 about x maps Jy onto Jz
        return apply_global_rotation(v, 0.0, 0.5 * pi)
    raise ValueError(f"unknown readout basis {basis!r}")


def sample_shots(v: np.ndarray, theta_analysis: float, n_shots: int, seed: int,
                 basis: str = "variance") -> ShotSet:
    """Sample projective z-basis snapshots after the analysis rotation.

    The counter-based Philox generator keyed by ``seed`` makes the draw
    deterministic and safely splittable across parallel jobs.
    """
    if n_shots < 1:
        raise ValueError("need at least one shot")
    v = np.asarray(v, dtype=complex)
    n = int(round(np.log2(v.size)))
    rotated = _analysis_rotation(v, theta_analysis, basis)
    probs = np.abs(rotated) ** 2
    probs /= probs.sum()
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    edges = np.cumsum(probs)
    draws = np.searchsorted(edges, rng.random(n_shots), side="right")
    draws = np.minimum(draws, probs.size - 1)
    bits = (draws[:, None] >> np.arange(n)) & 1
    outcomes = (2 * bits - 1).astype(np.int8)
    return ShotSet(outcomes=outcomes, theta=theta_analysis, seed=seed, basis=basis)


def shot_statistics(shots: ShotSet, resamples: int = 200, seed: int = 0) -> ShotStats:
    """Sample mean and unbiased variance of J_theta with bootstrap errors."""
    values = shots.j_values()
    n = values.size
    if n < 2:
        raise ValueError("need at least two shots for a variance")
    mean = float(values.mean())
    variance = float(values.var(ddof=1))
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    boot_means = np.empty(resamples)
    boot_vars = np.empty(resamples)
    for k in range(resamples):
        sample = values[rng.integers(0, n, size=n)]
        boot_means[k] = sample.mean()
        boot_vars[k] = sample.var(ddof=1)
    return ShotStats(mean=mean, variance=variance,
                     se_mean=float(boot_means.std(ddof=1)),
                     se_variance=float(boot_vars.std(ddof=1)),
                     n_shots=n, resamples=resamples)


def shotset_to_csv(shots: ShotSet, path) -> None:
    """Write outcomes as CSV, rows = shots, columns = atoms."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow([f"atom_{i}" for i in range(shots.n_atoms)])
        for row in shots.outcomes:
            writer.writerow([int(x) for x in row])


def shotset_from_csv(path, theta: float = 0.0, t_us: float = 0.0) -> ShotSet:
    """Read a (shots x atoms) matrix of +-1 outcomes, skipping a header row."""
    rows = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        try:
            rows.append([int(x) for x in header])  # headerless files still load
        except ValueError:
            pass
        for line in reader:
            if line:
                rows.append([int(x) for x in line])
    return ShotSet(outcomes=np.array(rows, dtype=np.int8), theta=theta, t_us=t_us)


def _collective_matrices(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense Jy, Jz for a single spin j = k/2 in the Jz eigenbasis."""
    j = 0.5 * k
    m = np.arange(-j, j + 1)
    ap = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))  # J+ |m> -> |m+1> amplitude
    jz = np.diag(m).astype(complex)
    jp = np.zeros((k + 1, k + 1), dtype=complex)
    for idx in range(k):
        jp[idx + 1, idx] = ap[idx]
    jy = (jp - jp.conj().T) / 2j
    return jy, jz


def _sweep_cluster_boundary(k: int, n_points: int) -> np.ndarray:
    """Raw (mean-spin fraction, normalized variance) sweep for exactly k spins.

    Ground states of Jz^2 - lambda Jy in the maximal-spin sector trace the
    attainable lower boundary as lambda grows. At lambda = 0 the Jz
    eigenstate closest to m = 0 is a legitimate ground state with zero
    variance, which the degenerate eigensolver would otherwise replace by a
    symmetric mixture for odd k; it is added explicitly.
    """
    j = 0.5 * k
    jy, jz = _collective_matrices(k)
    jz2 = jz @ jz
    lambdas = np.logspace(-3, 2.6, n_points) * max(j, 1.0)
    xs, ys = [0.0], [0.0]
    for lam in lambdas:
        _, evecs = eigh(jz2 - lam * jy)
        ground = evecs[:, 0]
        mean_y = float(np.real(ground.conj() @ (jy @ ground)))
        mean_z2 = float(np.real(ground.conj() @ (jz2 @ ground)))
        mean_z = float(np.real(ground.conj() @ (jz @ ground)))
        xs.append(mean_y / j)
        ys.append((mean_z2 - mean_z**2) / (0.25 * k))
    xs.append(1.0)
    ys.append(1.0)
    return np.column_stack([xs, ys])


def _lower_convex_envelope(points: np.ndarray) -> np.ndarray:
    """Lower convex hull (Andrew's monotone chain) of an (n, 2) point set."""
    pts = points[np.lexsort((points[:, 1], points[:, 0]))]
    hull: list[np.ndarray] = []
    for p in pts:
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0])
            if cross <= 0:  # a is above or on the chord o-p
                hull.pop()
            else:
                break
        hull.append(p)
    return np.array(hull)


def sm_depth_bound(k: int, n_points: int = 121) -> np.ndarray:
    """Minimal-variance boundary for states of clusters of at most k spins.

    Returns an (n, 2) array of (mean-spin fraction <Jy>/(k/2), normalized
    variance Var(Jz)/(k/4)). States of N spins separable into clusters of at
    most k atoms satisfy Var(Jz)/(N/4) >= curve(<Jy>/(N/2)); a point below
    the curve therefore witnesses entanglement depth at least k + 1.

    The boundary for each cluster size is traced by ground states of
    Jz^2 - lambda Jy over a multiplier sweep (dense (k+1)-dimensional
    collective-spin matrices). Because clusters smaller than k are allowed
    and cluster orientations can be mixed, the bound is the lower convex
    envelope over all sizes up to k; this also makes the curves nested in k.

    For k = 1 the boundary is the single-spin pure-state limit
    Var = <Jy>^2, i.e. the xi^2 = 1 contour.
    """
    if not 1 <= k <= 64:
        raise ValueError("cluster size k must be within 1..64")
    if k == 1:
        x = np.linspace(0.0, 1.0, n_points)
        return np.column_stack([x, x**2])
    points = [_sweep_cluster_boundary(kk, n_points) for kk in range(2, k + 1)]
    x1 = np.linspace(0.0, 1.0, n_points)
    points.append(np.column_stack([x1, x1**2]))
    return _lower_convex_envelope(np.vstack(points))


def sm_bound_value(curve: np.ndarray, mean_spin_fraction: float) -> float:
    """Interpolate a depth-bound curve at a given mean-spin fraction."""
    return float(np.interp(mean_spin_fraction, curve[:, 0], curve[:, 1]))
