"""Experiment orchestration and statistical analysis.

Builds on the lower-level modules to run complete simulated experiments:
time series of squeezing records with optional disorder realizations, shot
sampling and detection errors, optimum extraction through parabolic fits,
power-law scaling sweeps, variance-versus-angle scans, Floquet freezing runs
and the two-branch multistep comparison.

Raw columns carry the imperfections (excitation holes, detection flips,
sampling noise); corrected columns invert the analytic detection map; ideal
columns are the error-free unitary reference. All three are emitted side by
side.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import atan2, log10, pi

import numpy as np

from . import engine
from .engine import KrylovParams
from .errors import (
    ErrorModel,
    apply_stirap_holes,
    detection_forward_moments,
    detection_forward_shots,
    detection_inverse,
)
from .lattice import LatticeSpec, lattice_coupling
from .measurement import (
    MomentSummary,
    ShotSet,
    SqueezingRecord,
    moment_summary,
    record_from_moments,
    sample_shots,
    shot_statistics,
    theta_star,
    var_along,
)
from .operators import xy_hamiltonian
from .protocols import (
    FreeEvolution,
    ProtocolSchedule,
    Pulse,
    prepare_coherent_y,
    run_schedule,
    wahuha_cycle,
)

__all__ = [
    "AnalysisError",
    "OptimumFit",
    "ScalingResult",
    "EstimatedRecord",
    "SeriesPoint",
    "ExperimentSeries",
    "extract_optimum",
    "fit_power_law",
    "scaling_sweep",
    "sinusoid_fit",
    "theta_scan_table",
    "ideal_series",
    "experiment_series",
    "multistep_comparison",
    "floquet_experiment",
    "squeezed_window",
    "oat_scaling_records",
]


class AnalysisError(RuntimeError):
    """Numerical analysis failure (missing optimum, degenerate fit, ...)."""


@dataclass(frozen=True)
class OptimumFit:
    xi2_star: float
    t_star_us: float
    xi2_db_star: float
    used_fallback: bool = False


@dataclass(frozen=True)
class ScalingResult:
    sizes: tuple
    xi2_star: tuple
    t_star: tuple
    nu: float
    nu_se: float
    mu: float
    mu_se: float
    flags: tuple = ()


@dataclass(frozen=True)
class EstimatedRecord:
    """Shot- or map-based counterpart of a SqueezingRecord."""

    t_us: float
    mean_spin: float
    min_var: float
    xi2: float
    xi2_db: float
    se_mean_spin: float | None = None
    se_min_var: float | None = None
    se_xi2: float | None = None


@dataclass(frozen=True)
class SeriesPoint:
    t_us: float
    ideal: SqueezingRecord
    raw: EstimatedRecord
    corrected: EstimatedRecord


@dataclass(frozen=True)
class ExperimentSeries:
    points: tuple
    n_imaged: int
    meta: dict = field(default_factory=dict)

    def ideal_records(self) -> list[SqueezingRecord]:
        return [p.ideal for p in self.points]


def _pmap(fn, items, workers: int = 1):
    """Order-preserving parallel map with a bounded worker pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _child_seed(root: int, *key: int) -> int:
    """Deterministic per-task seed, independent of execution order."""
    ss = np.random.SeedSequence(entropy=int(root), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# ---------------------------------------------------------------------------
# optimum extraction and scaling fits

def extract_optimum(records, window: int = 2) -> OptimumFit:
    """Vertex of a parabola fitted to xi^2 (in dB) around the grid minimum.

    Falls back to the raw grid minimum (flagged) when the fitted vertex
    leaves the fit window or the parabola opens downward.
    """
    recs = [r for r in records if np.isfinite(r.xi2_db)]
    if len(recs) < 5:
        raise AnalysisError("need at least five finite records to fit an optimum")
    t = np.array([r.t_us for r in recs])
    db = np.array([r.xi2_db for r in recs])
    i0 = int(np.argmin(db))
    if i0 == 0 or i0 == len(recs) - 1:
        raise AnalysisError("no interior minimum in the squeezing curve")
    lo = max(0, i0 - window)
    hi = min(len(recs), i0 + window + 1)
    a, b, c = np.polyfit(t[lo:hi], db[lo:hi], 2)
    if a > 0:
        t_star = -b / (2.0 * a)
        if t[lo] <= t_star <= t[hi - 1]:
            db_star = np.polyval([a, b, c], t_star)
            return OptimumFit(10.0 ** (db_star / 10.0), float(t_star), float(db_star))
    return OptimumFit(10.0 ** (db[i0] / 10.0), float(t[i0]), float(db[i0]),
                      used_fallback=True)


def fit_power_law(x, y) -> tuple[float, float]:
    """Slope and its standard error of log(y) against log(x)."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if lx.size < 3:
        raise AnalysisError("need at least three sizes for a power-law fit")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    dof = lx.size - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    se = np.sqrt(s2 / float(((lx - lx.mean()) ** 2).sum()))
    return float(slope), float(se)


def scaling_sweep(sizes, runner, window: int = 2, workers: int = 1) -> ScalingResult:
    """Per-size optima and log-log exponents.

    ``runner`` maps a size to a list of SqueezingRecords; sizes that fail
    optimum extraction are dropped and flagged rather than aborting the
    sweep. xi2* ~ N^-nu and t* ~ N^mu.
    """
    sizes = list(sizes)
    if len(sizes) < 3:
        raise AnalysisError("need at least three sizes")
    all_records = _pmap(runner, sizes, workers)
    xi2s, tstars, kept, flags = [], [], [], []
    for size, records in zip(sizes, all_records):
        try:
            opt = extract_optimum(records, window=window)
        except AnalysisError as err:
            flags.append(f"N={size}: {err}")
            continue
        if opt.used_fallback:
            flags.append(f"N={size}: fallback to grid minimum")
        kept.append(size)
        xi2s.append(opt.xi2_star)
        tstars.append(opt.t_star_us)
    if len(kept) < 3:
        raise AnalysisError("fewer than three sizes produced an optimum")
    slope_xi, se_xi = fit_power_law(kept, xi2s)
    slope_t, se_t = fit_power_law(kept, tstars)
    return ScalingResult(
        sizes=tuple(kept), xi2_star=tuple(xi2s), t_star=tuple(tstars),
        nu=-slope_xi, nu_se=se_xi, mu=slope_t, mu_se=se_t, flags=tuple(flags),
    )


def oat_scaling_records(n: int, chi_mhz: float | None = None,
                        j_mhz: float = 0.25, n_grid: int = 400):
    """Twisting-model squeezing curve sized to bracket the optimum.

    With ``chi_mhz`` None the twisting rate is the scalable all-to-all
    normalization chi = J/N (pair couplings 1/N), for which the optimal time
    grows with the canonical N^(1/3) law; a fixed lattice-derived rate can be
    passed instead. The optimal squeezing itself is rate-independent.
    """
    from .rotor import oat_squeezing_curve

    if chi_mhz is None:
        chi_mhz = j_mhz / n
    # the optimal twisting phase scales as N^(-2/3); pad the window generously
    # but stay below the phase pi/2 about which the dynamics mirrors itself
    t_scale = (0.5 * n) ** (-2.0 / 3.0) / (2.0 * np.pi * chi_mhz)
    t_max = min(8.0 * t_scale, 0.25 / chi_mhz)
    grid = np.linspace(0.0, t_max, n_grid)
    return oat_squeezing_curve(n, chi_mhz, grid)


# ---------------------------------------------------------------------------
# variance-versus-angle scan

def sinusoid_fit(thetas, values, ses=None):
    """Least-squares fit of a period-pi sinusoid offset + R cos(2(theta - t0)).

    Returns (offset, amplitude, theta_star) with theta_star the minimum
    position folded into (-pi/2, pi/2].
    """
    th = np.asarray(thetas, dtype=float)
    y = np.asarray(values, dtype=float)
    if th.size < 4:
        raise AnalysisError("need at least four scan angles")
    design = np.column_stack([np.ones_like(th), np.cos(2 * th), np.sin(2 * th)])
    if ses is not None:
        wgt = 1.0 / np.clip(np.asarray(ses, dtype=float), 1e-12, None)
        design = design * wgt[:, None]
        y = y * wgt
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    a0, ac, bs = coef
    amp = float(np.hypot(ac, bs))
    if amp <= 1e-12 * max(1.0, abs(a0)):
        raise AnalysisError("flat angle scan, no preferred direction")
    t_min = 0.5 * atan2(bs, ac) + 0.5 * pi
    t_min = (t_min + 0.5 * pi) % pi - 0.5 * pi
    if t_min <= -0.5 * pi + 1e-15:
        t_min = 0.5 * pi
    return float(a0), amp, float(t_min)


def theta_scan_table(state: np.ndarray, thetas, n_shots: int, seed: int,
                     em: ErrorModel | None = None, resamples: int = 200):
    """Shot-sampled Var(J_theta) over an angle grid plus the sinusoid fit.

    Returns (rows, fit) where each row is a dict with the scan angle, the
    sampled variance and its bootstrap error, and the exact variance; the
    fit carries (offset, amplitude, theta_star).
    """
    ms = moment_summary(state)
    rows = []
    for k, theta in enumerate(thetas):
        bias = np.deg2rad(em.analysis_bias_deg) if em is not None else 0.0
        shots = sample_shots(state, float(theta) + bias, n_shots,
                             seed=_child_seed(seed, k, 0))
        if em is not None and (em.eps_up > 0 or em.eps_down > 0):
            rng = np.random.default_rng(_child_seed(seed, k, 1))
            shots = detection_forward_shots(shots, em, rng)
        st = shot_statistics(shots, resamples=resamples, seed=_child_seed(seed, k, 2))
        rows.append({
            "theta_rad": float(theta),
            "var": st.variance,
            "se_var": st.se_variance,
            "var_exact": var_along(ms, float(theta)),
        })
    try:
        fit = sinusoid_fit([r["theta_rad"] for r in rows], [r["var"] for r in rows],
                           [r["se_var"] for r in rows])
    except AnalysisError:
        fit = None  # degenerate scan, flagged by the caller
    return rows, fit


# ---------------------------------------------------------------------------
# experiment pipeline

def _standard_steps(h, total_us: float):
    return (FreeEvolution(h, total_us),)


def _multistep_steps(h, total_us: float, t1_us: float, angle_rad: float):
    if t1_us > total_us:
        raise AnalysisError("multistep rotation scheduled after the series end")
    return (FreeEvolution(h, t1_us),
            Pulse(0.5 * pi, angle_rad),
            FreeEvolution(h, total_us - t1_us))


def ideal_series(lattice: LatticeSpec, j_mhz: float, times,
                 params: KrylovParams | None = None, steps=None):
    """Error-free reference: states and exact moments along a time grid."""
    cm = lattice_coupling(lattice)
    h = xy_hamiltonian(cm, j_mhz)
    n = lattice.n_sites
    v0 = prepare_coherent_y(n)
    schedule = ProtocolSchedule(steps if steps is not None else _standard_steps(h, max(times)))
    states = run_schedule(schedule, v0, list(times), params)
    moments = [moment_summary(s) for s in states]
    records = [record_from_moments(m, n, float(t)) for m, t in zip(moments, times)]
    return states, moments, records


@dataclass
class _RealizationMoments:
    # per-time raw moment accumulators of the active atoms plus hole counts
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    jx2: np.ndarray
    jz2: np.ndarray
    cross: np.ndarray
    n_failed: int


def _run_realization(lattice, j_mhz, times, params, steps_builder, em, seed_r,
                     shots_per_real, thetas_ref):
    from .operators import collective_expectations

    rng = np.random.default_rng(seed_r)
    if em is not None and em.eta > 0:
        hole = apply_stirap_holes(lattice, em, rng)
    else:
        hole = None
    spec_r = lattice if hole is None else hole.active_spec
    n_failed = 0 if hole is None else hole.n_failed
    nt = len(times)
    if spec_r is None:
        # every atom failed: frozen all-up readout, no dynamics
        zeros = np.zeros(nt)
        mom = _RealizationMoments(zeros, zeros, zeros, zeros, zeros, zeros, n_failed)
        pairs = None
        if shots_per_real > 0:
            pairs = []
            for ti in range(nt):
                svar = ShotSet(np.ones((shots_per_real, n_failed), dtype=np.int8))
                if em is not None and (em.eps_up > 0 or em.eps_down > 0):
                    svar = detection_forward_shots(
                        svar, em, np.random.default_rng(_child_seed(seed_r, ti, 2)))
                slen = ShotSet(np.ones((shots_per_real, 0), dtype=np.int8))
                pairs.append((svar, slen))
        return mom, pairs if pairs is not None else [None] * nt
    cm = lattice_coupling(spec_r)
    h = xy_hamiltonian(cm, j_mhz)
    n_active = spec_r.n_sites
    v0 = prepare_coherent_y(n_active)
    schedule = ProtocolSchedule(steps_builder(h, max(times)))
    states = run_schedule(schedule, v0, list(times), params)
    vals = {k: np.zeros(nt) for k in ("jx", "jy", "jz", "jx2", "jz2", "cross")}
    shot_pairs = []
    for ti, state in enumerate(states):
        jx, jy, jz, jx2, jz2, cross = collective_expectations(state)
        for key, val in zip(vals, (jx, jy, jz, jx2, jz2, cross)):
            vals[key][ti] = val
        if shots_per_real > 0:
            bias = np.deg2rad(em.analysis_bias_deg) if em is not None else 0.0
            svar = sample_shots(state, thetas_ref[ti] + bias, shots_per_real,
                                seed=_child_seed(seed_r, ti, 0))
            slen = sample_shots(state, 0.0, shots_per_real,
                                seed=_child_seed(seed_r, ti, 1), basis="spin_length")
            if em is not None and (em.eps_up > 0 or em.eps_down > 0):
                svar = detection_forward_shots(
                    svar, em, np.random.default_rng(_child_seed(seed_r, ti, 2)))
                slen = detection_forward_shots(
                    slen, em, np.random.default_rng(_child_seed(seed_r, ti, 3)))
            # excitation failures are imaged as up in the z-basis snapshots
            if n_failed > 0:
                pad = np.ones((shots_per_real, n_failed), dtype=np.int8)
                svar = ShotSet(np.hstack([svar.outcomes, pad]),
                               theta=svar.theta, basis=svar.basis)
            shot_pairs.append((svar, slen))
        else:
            shot_pairs.append(None)
    mom = _RealizationMoments(vals["jx"], vals["jy"], vals["jz"],
                              vals["jx2"], vals["jz2"], vals["cross"], n_failed)
    return mom, shot_pairs


def experiment_series(lattice: LatticeSpec, j_mhz: float, times, *,
                      shots: int = 0, realizations: int = 1, seed: int = 0,
                      em: ErrorModel | None = None,
                      params: KrylovParams | None = None,
                      protocol: dict | None = None,
                      workers: int = 1) -> ExperimentSeries:
    """Full simulated experiment over a time grid.

    Ideal columns pool the exact moments over disorder realizations (the
    uninitialized atoms of a realization carry zero transverse polarization
    and add a constant +1/2 per atom to every z-basis reading). Raw columns
    are shot estimates including detection flips when ``shots`` > 0, else
    the analytic detection-forward map; corrected columns invert that map.
    """
    times = [float(t) for t in times]
    n_imaged = lattice.n_sites
    protocol = protocol or {"kind": "standard"}
    em_eff = em or ErrorModel(eta=0.0, eps_up=0.0, eps_down=0.0)
    if em_eff.eta <= 0:
        realizations = 1

    def steps_builder(h, total):
        kind = protocol.get("kind", "standard")
        if kind == "standard":
            return _standard_steps(h, total)
        if kind == "multistep":
            return _multistep_steps(h, total, protocol["t1_us"], protocol["angle_rad"])
        if kind == "custom":
            from .config import steps_from_config

            return steps_from_config(protocol["steps"], h)
        raise AnalysisError(f"unknown protocol kind {kind!r}")

    # error-free reference fixes the analysis angles, as a calibration run does
    _, ref_moments, ref_records = ideal_series(
        lattice, j_mhz, times, params,
        steps=steps_builder(xy_hamiltonian(lattice_coupling(lattice), j_mhz), max(times)))
    thetas_ref = [r.theta_star for r in ref_records]

    shots_per_real = shots // realizations + (1 if shots % realizations else 0) if shots else 0

    def job(r):
        return _run_realization(lattice, j_mhz, times, params, steps_builder,
                                em_eff, _child_seed(seed, r), shots_per_real, thetas_ref)

    results = _pmap(job, range(realizations), workers)
    moments = [m for m, _ in results]
    nt = len(times)

    # pooled raw moments of the active atoms (law of total variance)
    def pool(attr):
        return np.mean([getattr(m, attr) for m in moments], axis=0)

    jx, jy, jz = pool("jx"), pool("jy"), pool("jz")
    jx2, jz2, cross = pool("jx2"), pool("jz2"), pool("cross")
    fails = np.array([m.n_failed for m in moments], dtype=float)
    hole_mean = 0.5 * fails.mean()
    hole_var = 0.25 * fails.var()  # across realizations

    points = []
    for ti, t in enumerate(times):
        ms = MomentSummary(
            mean_x=float(jx[ti]), mean_y=float(jy[ti]), mean_z=float(jz[ti]),
            var_x=max(float(jx2[ti] - jx[ti] ** 2), 0.0) + hole_var,
            var_z=max(float(jz2[ti] - jz[ti] ** 2), 0.0) + hole_var,
            cov_xz=float(cross[ti] - jx[ti] * jz[ti]),
        )
        ideal = record_from_moments(ms, n_imaged, t)
        # transverse mean along the analysis axis, before and after detection
        mean_theta_tilde = (np.cos(ideal.theta_star) * ms.mean_z
                            + np.sin(ideal.theta_star) * ms.mean_x + hole_mean)
        if shots_per_real > 0:
            var_values = np.concatenate([results[r][1][ti][0].j_values()
                                         for r in range(realizations)])
            len_values = np.concatenate([results[r][1][ti][1].j_values()
                                         for r in range(realizations)])
            raw = _estimate_from_shots(var_values, len_values,
                                       n_imaged, t, _child_seed(seed, 10_000 + ti))
            mean_theta_meas = float(var_values.mean())
        else:
            mlen, _ = detection_forward_moments(ideal.mean_spin, 0.0, 0.0,
                                                n_imaged, em_eff)
            _, vraw = detection_forward_moments(0.0, ideal.min_var, mean_theta_tilde,
                                                n_imaged, em_eff)
            raw = _record_from_estimates(t, abs(mlen), vraw, n_imaged)
            mean_theta_meas, _ = detection_forward_moments(
                mean_theta_tilde, 0.0, 0.0, n_imaged, em_eff)
        corrected = _correct_record(raw, mean_theta_meas, n_imaged, em_eff, t)
        points.append(SeriesPoint(t, ideal, raw, corrected))
    meta = {
        "realizations": realizations,
        "shots": shots,
        "seed": seed,
        "hole_mean": hole_mean,
        "hole_var": hole_var,
        "protocol": protocol,
    }
    return ExperimentSeries(points=tuple(points), n_imaged=n_imaged, meta=meta)


def _record_from_estimates(t, mean_spin, min_var, n, se_mean=None, se_var=None):
    if mean_spin**2 < 1e-12 * (0.5 * n) ** 2:
        return EstimatedRecord(t, mean_spin, min_var, np.inf, np.inf, se_mean, se_var)
    xi2 = n * min_var / mean_spin**2
    se_xi2 = None
    if se_mean is not None and se_var is not None:
        se_xi2 = xi2 * np.sqrt((se_var / max(min_var, 1e-30)) ** 2
                               + (2.0 * se_mean / mean_spin) ** 2)
    db = 10.0 * log10(xi2) if xi2 > 0 else -np.inf
    return EstimatedRecord(t, mean_spin, min_var, xi2, db, se_mean, se_var, se_xi2)


def _estimate_from_shots(var_values, len_values, n, t, boot_seed):
    mean_spin = float(np.abs(len_values.mean()))
    min_var = float(np.var(var_values, ddof=1))
    rng = np.random.default_rng(boot_seed)
    nb = 200
    bm = np.empty(nb)
    bv = np.empty(nb)
    nv, nl = var_values.size, len_values.size
    for k in range(nb):
        bv[k] = np.var(var_values[rng.integers(0, nv, nv)], ddof=1)
        bm[k] = abs(len_values[rng.integers(0, nl, nl)].mean())
    return _record_from_estimates(t, mean_spin, min_var, n,
                                  se_mean=float(bm.std(ddof=1)),
                                  se_var=float(bv.std(ddof=1)))


def _correct_record(raw: EstimatedRecord, mean_theta, n, em: ErrorModel, t):
    mean_c, var_c = detection_inverse(raw.mean_spin, raw.min_var, mean_theta, n, em)
    se_mean = se_var = None
    denom = 1.0 - em.eps_down - em.eps_up
    vdenom = 1.0 - 2.0 * (em.eps_down + em.eps_up)
    if raw.se_mean_spin is not None:
        se_mean = raw.se_mean_spin / denom
    if raw.se_min_var is not None:
        se_var = raw.se_min_var / abs(vdenom)
    return _record_from_estimates(t, abs(mean_c), max(var_c, 0.0), n, se_mean, se_var)


# ---------------------------------------------------------------------------
# protocol studies

def multistep_comparison(lattice: LatticeSpec, j_mhz: float, times, *,
                         t1_us: float, angle_rad: float | None = None,
                         params: KrylovParams | None = None):
    """Single-step versus multistep squeezing from identical initial states.

    With ``angle_rad`` None the intermediate rotation is tuned from the exact
    noise ellipse at t1: rotating by -theta*(t1) about y lays the major axis
    along the equator.
    """
    cm = lattice_coupling(lattice)
    h = xy_hamiltonian(cm, j_mhz)
    n = lattice.n_sites
    _, _, single = ideal_series(lattice, j_mhz, times, params)
    if angle_rad is None:
        v1 = engine.evolve(h, prepare_coherent_y(n), t1_us, params)
        angle_rad = -theta_star(moment_summary(v1)).theta
    steps = _multistep_steps(h, max(times), t1_us, angle_rad)
    _, _, multi = ideal_series(lattice, j_mhz, times, params, steps=steps)
    return single, multi, angle_rad


def floquet_experiment(lattice: LatticeSpec, j_mhz: float, *, hold_us: float,
                       t_f_us: float, n_cycles_list, tail_times,
                       params: KrylovParams | None = None,
                       pre_times=None) -> dict:
    """Freeze the squeezing dynamics with repeated four-pulse cycles.

    For each n the protocol evolves freely for ``hold_us``, applies n cycles
    of duration ``t_f_us``, then resumes free evolution probed at
    ``tail_times`` (relative to the end of the cycles). Records are reported
    against total elapsed time. n = 0 reproduces the plain quench.
    """
    cm = lattice_coupling(lattice)
    h = xy_hamiltonian(cm, j_mhz)
    n = lattice.n_sites
    v0 = prepare_coherent_y(n)
    out = {}
    for n_cycles in n_cycles_list:
        steps = [FreeEvolution(h, hold_us)]
        for _ in range(int(n_cycles)):
            steps.extend(wahuha_cycle(h, t_f_us))
        checkpoints = list(pre_times or [])
        checkpoints += [hold_us + k * t_f_us for k in range(int(n_cycles) + 1)]
        t_end = hold_us + n_cycles * t_f_us
        tail = [t_end + float(dt) for dt in tail_times if dt > 0]
        if tail:
            steps.append(FreeEvolution(h, tail[-1] - t_end))
        checkpoints += tail
        checkpoints = sorted(set(round(c, 9) for c in checkpoints))
        schedule = ProtocolSchedule(tuple(steps))
        states = run_schedule(schedule, v0, checkpoints, params)
        out[int(n_cycles)] = [
            record_from_moments(moment_summary(s), n, t)
            for s, t in zip(states, checkpoints)
        ]
    return out


def squeezed_window(records) -> tuple[float, float]:
    """First and last time with xi^2 < 1, linearly interpolating the exit."""
    t = np.array([r.t_us for r in records])
    db = np.array([r.xi2_db for r in records])
    below = db < 0.0
    if not below.any():
        raise AnalysisError("never squeezed")
    first = int(np.argmax(below))
    last = int(len(below) - 1 - np.argmax(below[::-1]))
    t_enter = t[first]
    if first > 0:
        f = db[first - 1] / (db[first - 1] - db[first])
        t_enter = t[first - 1] + f * (t[first] - t[first - 1])
    if last == len(below) - 1:
        return float(t_enter), float(t[last])
    f = db[last] / (db[last] - db[last + 1])
    t_exit = t[last] + f * (t[last + 1] - t[last])
    return float(t_enter), float(t_exit)
