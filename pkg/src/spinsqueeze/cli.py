"""Command-line entry point.

Subcommands reproduce the main numerical experiments from a YAML run
configuration and write CSV tables plus a JSON summary (and optional SVG
plots) into the output directory. Exit codes: 0 success, 1 configuration
error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from math import pi
from pathlib import Path

import numpy as np

from . import __version__, analysis, engine, semiclassical
from .analysis import AnalysisError, extract_optimum, fit_power_law
from .config import ConfigError, RunConfig
from .errors import ErrorModel, detection_inverse
from .lattice import LatticeError, LatticeSpec, lattice_coupling, twisting_rate
from .measurement import (
    BoundViolationError,
    shot_statistics,
    shotset_from_csv,
    sm_depth_bound,
)
from .operators import xy_hamiltonian
from .protocols import ScheduleError, prepare_coherent_y

# experimentally reported scaling exponents, kept for report annotation only
REFERENCE_EXPONENTS = {"nu": 0.18, "nu_err": 0.02, "mu": 0.32, "mu_err": 0.03}


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.12g}"
    return x


def _write_json(path: Path, payload: dict) -> None:
    def default(obj):
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        raise TypeError(f"not serializable: {type(obj)}")

    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=default)
        f.write("\n")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config(args) -> RunConfig:
    if not args.config:
        raise ConfigError("this subcommand requires --config")
    cfg = RunConfig.from_yaml(args.config)
    if args.seed is not None:
        cfg = RunConfig.from_dict({**_cfg_dict(cfg), "seed": args.seed})
    if args.shots is not None:
        cfg = RunConfig.from_dict({**_cfg_dict(cfg), "shots": args.shots})
    if getattr(args, "exact_only", False):
        cfg = RunConfig.from_dict({**_cfg_dict(cfg), "shots": 0})
    return cfg


def _cfg_dict(cfg: RunConfig) -> dict:
    return {
        "version": cfg.version,
        "seed": cfg.seed,
        "lattice": {
            "rows": cfg.lattice.rows,
            "cols": cfg.lattice.cols,
            "spacing_um": cfg.lattice.spacing_um,
            "boundary": cfg.lattice.boundary,
            "holes": sorted(cfg.lattice.holes),
        },
        "j_mhz": cfg.j_mhz,
        "times": list(cfg.times),
        "shots": cfg.shots,
        "realizations": cfg.realizations,
        "workers": cfg.workers,
        "error_model": {
            "eta": cfg.error_model.eta,
            "eps_up": cfg.error_model.eps_up,
            "eps_down": cfg.error_model.eps_down,
            "seed": cfg.error_model.seed,
            "analysis_bias_deg": cfg.error_model.analysis_bias_deg,
        },
        "krylov": {
            "max_dim": cfg.krylov.max_dim,
            "step_us": cfg.krylov.step_us,
            "tol": cfg.krylov.tol,
        },
        "protocol": cfg.protocol,
    }


def _resolve_protocol(cfg: RunConfig) -> dict:
    proto = dict(cfg.protocol)
    kind = proto.get("kind", "standard")
    if kind == "multistep":
        t1 = float(proto.get("t1_us", 0.13))
        angle = proto.get("angle_deg", "auto")
        if angle == "auto":
            h = xy_hamiltonian(lattice_coupling(cfg.lattice), cfg.j_mhz)
            v1 = engine.evolve(h, prepare_coherent_y(cfg.lattice.n_sites), t1, cfg.krylov)
            from .measurement import moment_summary, theta_star

            angle_rad = -theta_star(moment_summary(v1)).theta
        else:
            angle_rad = np.deg2rad(float(angle))
        return {"kind": "multistep", "t1_us": t1, "angle_rad": float(angle_rad)}
    return proto


def _series_rows(series: analysis.ExperimentSeries):
    header = [
        "t_us",
        "ideal_mean_spin", "ideal_theta_star", "ideal_min_var", "ideal_xi2", "ideal_xi2_db",
        "raw_mean_spin", "raw_min_var", "raw_xi2", "raw_xi2_db",
        "raw_se_mean_spin", "raw_se_min_var",
        "corr_mean_spin", "corr_min_var", "corr_xi2", "corr_xi2_db",
    ]
    rows = []
    for p in series.points:
        rows.append([
            p.t_us,
            p.ideal.mean_spin, p.ideal.theta_star, p.ideal.min_var,
            p.ideal.xi2, p.ideal.xi2_db,
            p.raw.mean_spin, p.raw.min_var, p.raw.xi2, p.raw.xi2_db,
            p.raw.se_mean_spin if p.raw.se_mean_spin is not None else "",
            p.raw.se_min_var if p.raw.se_min_var is not None else "",
            p.corrected.mean_spin, p.corrected.min_var,
            p.corrected.xi2, p.corrected.xi2_db,
        ])
    return header, rows


def _optimum_or_none(records, window=2):
    try:
        opt = extract_optimum(records, window=window)
    except AnalysisError as err:
        return {"error": str(err)}
    return {
        "xi2_star": opt.xi2_star,
        "t_star_us": opt.t_star_us,
        "xi2_db_star": opt.xi2_db_star,
        "used_fallback": opt.used_fallback,
    }


def _cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    proto = _resolve_protocol(cfg)
    series = analysis.experiment_series(
        cfg.lattice, cfg.j_mhz, cfg.times, shots=cfg.shots,
        realizations=cfg.realizations, seed=cfg.seed, em=cfg.error_model,
        params=cfg.krylov, protocol=proto, workers=cfg.workers,
    )
    header, rows = _series_rows(series)
    _write_csv(out / "series.csv", header, rows)
    ideal = series.ideal_records()
    raw_recs = [p.raw for p in series.points]
    corr_recs = [p.corrected for p in series.points]
    summary = {
        "version": __version__,
        "config": _cfg_dict(cfg),
        "protocol_resolved": proto,
        "n_imaged": series.n_imaged,
        "optimum_ideal": _optimum_or_none(ideal),
        "optimum_raw": _optimum_or_none(raw_recs),
        "optimum_corrected": _optimum_or_none(corr_recs),
        "xi2_floor": 2.0 / (2.0 + series.n_imaged),
    }
    _write_json(out / "summary.json", summary)
    if args.svg:
        from .plotting import line_plot_svg

        t = [p.t_us for p in series.points]
        line_plot_svg(out / "squeezing.svg", t,
                      {"ideal": [p.ideal.xi2_db for p in series.points],
                       "raw": [p.raw.xi2_db for p in series.points],
                       "corrected": [p.corrected.xi2_db for p in series.points]},
                      "t (us)", "xi^2 (dB)", hlines={"SQL": 0.0})
    print(f"wrote {out / 'series.csv'}")
    return 0


def _cmd_theta_scan(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    n_thetas = args.thetas
    thetas = np.linspace(-0.5 * pi, 0.5 * pi, n_thetas, endpoint=False)
    h = xy_hamiltonian(lattice_coupling(cfg.lattice), cfg.j_mhz)
    state = engine.evolve(h, prepare_coherent_y(cfg.lattice.n_sites), args.t_us, cfg.krylov)
    shots = cfg.shots or 200
    em = cfg.error_model if not args.exact_only else None
    rows, fit = analysis.theta_scan_table(state, thetas, shots, cfg.seed, em=em)
    n = cfg.lattice.n_sites
    header = ["theta_rad", "var", "se_var", "var_exact", "var_sql"]
    table = [[r["theta_rad"], r["var"], r["se_var"], r["var_exact"], 0.25 * n] for r in rows]
    _write_csv(out / "theta_scan.csv", header, table)
    from .measurement import moment_summary, theta_star

    exact = theta_star(moment_summary(state))
    summary = {
        "t_us": args.t_us,
        "shots": shots,
        "theta_star_exact": exact.theta,
        "min_var_exact": exact.min_var,
        "fit": None if fit is None else
        {"offset": fit[0], "amplitude": fit[1], "theta_star": fit[2]},
        "degenerate_scan": fit is None,
    }
    _write_json(out / "theta_scan.json", summary)
    if args.svg:
        from .plotting import line_plot_svg

        line_plot_svg(out / "theta_scan.svg", [r["theta_rad"] for r in rows],
                      {"sampled": [r["var"] for r in rows],
                       "exact": [r["var_exact"] for r in rows]},
                      "theta (rad)", "Var(J_theta)", hlines={"SQL N/4": 0.25 * n})
    print(f"wrote {out / 'theta_scan.csv'}")
    return 0


def _parse_sizes(text: str):
    sizes = []
    for token in text.split(","):
        token = token.strip().lower()
        if "x" in token:
            r, c = token.split("x")
            sizes.append((int(r), int(c)))
        else:
            sizes.append((int(token), 1))
    return sizes


def _cmd_scaling(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    sizes = _parse_sizes(args.sizes)
    results = {}
    per_size_rows = []
    for label in ("ideal", "raw", "corrected"):
        results[label] = {"sizes": [], "xi2_star": [], "t_star": [], "flags": []}
    for rows_, cols_ in sizes:
        lat = LatticeSpec(rows=rows_, cols=cols_, spacing_um=cfg.lattice.spacing_um,
                          boundary=cfg.lattice.boundary)
        series = analysis.experiment_series(
            lat, cfg.j_mhz, cfg.times, shots=cfg.shots,
            realizations=cfg.realizations, seed=cfg.seed, em=cfg.error_model,
            params=cfg.krylov, workers=cfg.workers)
        n = lat.n_sites
        for label, recs in (("ideal", series.ideal_records()),
                            ("raw", [p.raw for p in series.points]),
                            ("corrected", [p.corrected for p in series.points])):
            opt = _optimum_or_none(recs)
            if "error" in opt:
                results[label]["flags"].append(f"N={n}: {opt['error']}")
                continue
            results[label]["sizes"].append(n)
            results[label]["xi2_star"].append(opt["xi2_star"])
            results[label]["t_star"].append(opt["t_star_us"])
            per_size_rows.append([f"{rows_}x{cols_}", n, label,
                                  opt["xi2_star"], opt["t_star_us"]])
    summary = {"reference_exponents": REFERENCE_EXPONENTS, "fits": {}}
    for label, res in results.items():
        if len(res["sizes"]) >= 3:
            slope_xi, se_xi = fit_power_law(res["sizes"], res["xi2_star"])
            slope_t, se_t = fit_power_law(res["sizes"], res["t_star"])
            summary["fits"][label] = {
                "nu": -slope_xi, "nu_se": se_xi, "mu": slope_t, "mu_se": se_t,
                "sizes": res["sizes"], "flags": res["flags"],
            }
        else:
            summary["fits"][label] = {"error": "fewer than three optima",
                                      "flags": res["flags"]}
    _write_csv(out / "scaling.csv", ["size", "n", "column", "xi2_star", "t_star_us"],
               per_size_rows)
    _write_json(out / "scaling.json", summary)
    print(f"wrote {out / 'scaling.json'}")
    return 0


def _cmd_floquet(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    proto = dict(cfg.protocol)
    hold = float(proto.get("hold_us", 0.3))
    t_f = float(proto.get("t_f_us", 0.36))
    cycles = [int(c) for c in proto.get("cycles", (0, 1, 2, 3))]
    tail = float(proto.get("tail_us", 0.6))
    step = cfg.times[1] - cfg.times[0] if len(cfg.times) > 1 else 0.05
    tail_times = np.arange(0.0, tail + 0.5 * step, step)
    pre = [t for t in cfg.times if t < hold]
    curves = analysis.floquet_experiment(
        cfg.lattice, cfg.j_mhz, hold_us=hold, t_f_us=t_f,
        n_cycles_list=cycles, tail_times=tail_times, params=cfg.krylov,
        pre_times=pre)
    summary = {"hold_us": hold, "t_f_us": t_f, "cycles": {}}
    for n_c, records in curves.items():
        rows = [[r.t_us, r.mean_spin, r.theta_star, r.min_var, r.xi2, r.xi2_db]
                for r in records]
        _write_csv(out / f"floquet_n{n_c}.csv",
                   ["t_us", "mean_spin", "theta_star", "min_var", "xi2", "xi2_db"],
                   rows)
        try:
            window = analysis.squeezed_window(records)
        except AnalysisError:
            window = None
        summary["cycles"][str(n_c)] = {
            "squeezed_window_us": window,
            "final_xi2_db": records[-1].xi2_db,
        }
    _write_json(out / "floquet.json", summary)
    if args.svg:
        # per-n grids differ; plot each against its own time axis
        import matplotlib

        matplotlib.use("Agg", force=False)
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 4))
        for n_c, recs in curves.items():
            ax.plot([r.t_us for r in recs], [r.xi2_db for r in recs],
                    marker="o", ms=3, label=f"n={n_c}")
        ax.axhline(0.0, ls="--", color="k", alpha=0.6)
        ax.set_xlabel("t (us)")
        ax.set_ylabel("xi^2 (dB)")
        ax.legend(fontsize="small")
        fig.tight_layout()
        fig.savefig(out / "floquet.svg", format="svg")
        plt.close(fig)
    print(f"wrote {out / 'floquet.json'}")
    return 0


def _cmd_multistep(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    proto = dict(cfg.protocol)
    t1 = float(proto.get("t1_us", 0.13))
    angle = proto.get("angle_deg", "auto")
    angle_rad = None if angle == "auto" else np.deg2rad(float(angle))
    single, multi, used_angle = analysis.multistep_comparison(
        cfg.lattice, cfg.j_mhz, cfg.times, t1_us=t1, angle_rad=angle_rad,
        params=cfg.krylov)
    for name, records in (("single", single), ("multi", multi)):
        _write_csv(out / f"multistep_{name}.csv",
                   ["t_us", "mean_spin", "theta_star", "min_var", "xi2", "xi2_db"],
                   [[r.t_us, r.mean_spin, r.theta_star, r.min_var, r.xi2, r.xi2_db]
                    for r in records])
    summary = {
        "t1_us": t1,
        "angle_deg_used": float(np.rad2deg(used_angle)),
        "optimum_single": _optimum_or_none(single),
        "optimum_multi": _optimum_or_none(multi),
    }
    _write_json(out / "multistep.json", summary)
    if args.svg:
        from .plotting import line_plot_svg

        line_plot_svg(out / "multistep.svg", [r.t_us for r in single],
                      {"single": [r.xi2_db for r in single],
                       "multi": [r.xi2_db for r in multi]},
                      "t (us)", "xi^2 (dB)", hlines={"SQL": 0.0})
    print(f"wrote {out / 'multistep.json'}")
    return 0


def _cmd_oat(args) -> int:
    out = _out_dir(args)
    sizes = [int(s) for s in args.sizes.split(",")]
    chi = args.chi_mhz
    result = analysis.scaling_sweep(
        sizes, lambda n: analysis.oat_scaling_records(n, chi), workers=1)
    rows = [[n, x, t] for n, x, t in zip(result.sizes, result.xi2_star, result.t_star)]
    _write_csv(out / "oat_scaling.csv", ["n", "xi2_star", "t_star_us"], rows)
    _write_json(out / "oat_scaling.json", {
        "chi_mhz": chi if chi is not None else "J/N",
        "nu": result.nu, "nu_se": result.nu_se,
        "mu": result.mu, "mu_se": result.mu_se,
        "asymptotic_nu": 2.0 / 3.0, "asymptotic_mu": 1.0 / 3.0,
        "flags": list(result.flags),
    })
    if args.svg:
        from .plotting import line_plot_svg

        line_plot_svg(out / "oat_scaling.svg", list(result.sizes),
                      {"xi2_star": list(result.xi2_star)}, "N", "xi2*")
    print(f"wrote {out / 'oat_scaling.json'}")
    return 0


def _cmd_sm_bounds(args) -> int:
    out = _out_dir(args)
    ks = [int(k) for k in args.k_list.split(",")]
    for k in ks:
        curve = sm_depth_bound(k, n_points=args.points)
        _write_csv(out / f"sm_bound_k{k}.csv",
                   ["mean_spin_fraction", "normalized_min_var"],
                   [[float(x), float(y)] for x, y in curve])
    _write_json(out / "sm_bounds.json", {"k_list": ks, "points": args.points})
    print(f"wrote sm_bound_k*.csv for k in {ks}")
    return 0


def _cmd_semiclassical(args) -> int:
    out = _out_dir(args)
    n = args.n
    if args.j_tilde_mhz is not None:
        j_tilde = args.j_tilde_mhz
    else:
        # shear rate tied to the collective twisting rate of a square array
        side = int(round(np.sqrt(n)))
        lat = LatticeSpec(rows=side, cols=max(side, 1))
        j_tilde = 2.0 * n * twisting_rate(lattice_coupling(lat), 0.25)
    ens = semiclassical.sc_initial(n, args.points, j_tilde, m_xy=args.m_xy,
                                   seed=args.seed or 0)
    times = np.arange(0.0, args.t_max + 0.5 * args.t_step, args.t_step)
    rows = []
    for t in times:
        evolved = semiclassical.sc_evolve(ens, float(t))
        ts, proxy = semiclassical.sc_squeezing(evolved)
        rows.append([float(t), ts.min_var, ts.theta, proxy, int(ts.degenerate)])
        if args.svg and t in (times[0], times[-1]):
            from .plotting import scatter_plot_svg

            scatter_plot_svg(out / f"cloud_t{t:.3f}.svg", evolved.points,
                             "x", "z", title=f"t = {t:.3f} us")
    _write_csv(out / "semiclassical.csv",
               ["t_us", "min_var", "theta_star", "xi2_proxy", "degenerate"], rows)
    _write_json(out / "semiclassical.json",
                {"n": n, "j_tilde_mhz": j_tilde, "m_xy": args.m_xy,
                 "points": args.points})
    print(f"wrote {out / 'semiclassical.csv'}")
    return 0


def _cmd_correct(args) -> int:
    out = _out_dir(args)
    shots = shotset_from_csv(args.input)
    em = ErrorModel(eta=0.0, eps_up=args.eps_up, eps_down=args.eps_down)
    stats = shot_statistics(shots, resamples=args.resamples, seed=args.seed or 0)
    n = args.n or shots.n_atoms
    mean_c, var_c = detection_inverse(stats.mean, stats.variance,
                                      args.mean_theta if args.mean_theta is not None
                                      else stats.mean,
                                      n, em,
                                      neglect_theta_mean=args.neglect_theta_mean)
    _write_json(out / "corrected.json", {
        "n": n,
        "shots": stats.n_shots,
        "raw": {"mean": stats.mean, "variance": stats.variance,
                "se_mean": stats.se_mean, "se_variance": stats.se_variance},
        "corrected": {"mean": mean_c, "variance": var_c},
        "eps_up": args.eps_up,
        "eps_down": args.eps_down,
    })
    print(f"wrote {out / 'corrected.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinsqueeze",
        description="Squeezing dynamics of dipolar XY spin arrays",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out-dir", default="out", help="output directory")
        p.add_argument("--shots", type=int, default=None, help="override config shots")
        p.add_argument("--exact-only", action="store_true",
                       help="skip shot sampling, exact moments only")
        p.add_argument("--svg", action="store_true", help="emit SVG plots")

    p = sub.add_parser("simulate", help="time series for one configuration")
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("theta-scan", help="variance versus analysis angle")
    common(p)
    p.add_argument("--t-us", type=float, required=True, help="evolution time")
    p.add_argument("--thetas", type=int, default=16, help="number of scan angles")
    p.set_defaults(func=_cmd_theta_scan)

    p = sub.add_parser("scaling", help="optima and exponents versus system size")
    common(p)
    p.add_argument("--sizes", default="2x2,3x3,4x4",
                   help="comma-separated sizes, e.g. 2x2,3x3,4x4")
    p.set_defaults(func=_cmd_scaling)

    p = sub.add_parser("floquet", help="freeze squeezing with pulse cycles")
    common(p)
    p.set_defaults(func=_cmd_floquet)

    p = sub.add_parser("multistep", help="single-step versus multistep squeezing")
    common(p)
    p.set_defaults(func=_cmd_multistep)

    p = sub.add_parser("oat", help="collective twisting-model scaling sweep")
    p.add_argument("--sizes", default="8,16,32,64,128,256")
    p.add_argument("--chi-mhz", type=float, default=None,
                   help="fixed twisting rate; default scales as J/N")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=_cmd_oat)

    p = sub.add_parser("sm-bounds", help="entanglement-depth bound curves")
    p.add_argument("--k-list", default="1,2,3,4,6,16,36")
    p.add_argument("--points", type=int, default=121)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=_cmd_sm_bounds)

    p = sub.add_parser("semiclassical", help="classical ensemble shear model")
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--points", type=int, default=100_000)
    p.add_argument("--j-tilde-mhz", type=float, default=None)
    p.add_argument("--m-xy", type=float, default=1.0)
    p.add_argument("--t-max", type=float, default=0.6)
    p.add_argument("--t-step", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="out")
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=_cmd_semiclassical)

    p = sub.add_parser("correct", help="invert detection errors on a shot CSV")
    p.add_argument("--input", required=True, help="shot matrix CSV (+-1 entries)")
    p.add_argument("--n", type=int, default=None, help="atom number (default: columns)")
    p.add_argument("--eps-up", type=float, default=0.025)
    p.add_argument("--eps-down", type=float, default=0.010)
    p.add_argument("--mean-theta", type=float, default=None)
    p.add_argument("--neglect-theta-mean", action="store_true")
    p.add_argument("--resamples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=_cmd_correct)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, LatticeError, ScheduleError, FileNotFoundError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 1
    except (AnalysisError, engine.PropagationError, BoundViolationError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
