"""``llgfront`` command line: simulate-spde, simulate-cc, fit, analyze, verify.

Exit codes: 0 success, 1 validation error, 2 runtime failure, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .. import spde
from ..collective import coefficients as coeffmod
from ..collective import integrate
from ..collective.events import detect_events
from ..errors import ConfigError, LLGFrontError
from ..fitting import fit_trajectory
from ..geometry import CCState, MagnetizationField
from .. import stats
from .config import load_config, schema_document
from .io import column, read_table, snapshots_to_table, table_to_snapshots, write_csv, write_table
from .manifest import RunManifest
from .pool import run_tasks
from . import verify as verifymod

log = logging.getLogger("llgfront")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3

SPDE_SCHEME = {
    "id": "lie-split cayley-midpoint noise + crank-nicolson/AB2, pointwise renormalisation",
    "divergence_defect": spde.DIVERGENCE_DEFECT,
    "boundary_margin": spde.BOUNDARY_MARGIN,
}
CC_SCHEME = {
    "id": "ito euler-maruyama, reject-and-halve with brownian bridge",
    "max_move": integrate.MAX_MOVE,
    "max_halvings": integrate.MAX_HALVINGS,
    "cos_eta_min": coeffmod.COS_ETA_MIN,
    "event_merge_gap": 10,
}


# ---------------------------------------------------------------- tasks (pure, picklable)

def _spde_task(task):
    cfg, index = task
    params = cfg.model_params()
    s = cfg.section("spde")
    m0 = spde.initial_front(params, width=s["width"])
    traj = spde.simulate(params, m0, s["T"], snapshot_stride=s["snapshot_stride"], index=index)
    return index, traj


def _cc_task(task):
    cfg, index = task
    c = cfg.section("cc")
    params = cfg.model_params(dt=c["dt"])
    start = CCState(w=c["w0"], theta=c["theta0"], eta=c["eta0"], phi=c["phi0"], psi=c["psi0"])
    traj = integrate.simulate_cc(params, start, c["T"], thin=c["thin"], index=index,
                                 raise_on_failure=False)
    return index, traj


# ---------------------------------------------------------------- commands

def _manifest(cfg, command):
    return RunManifest(experiment=cfg["experiment.name"], command=command,
                       seed=cfg["experiment.seed"], config=cfg.to_dict(), scheme={})


def cmd_simulate_spde(cfg, out: Path) -> int:
    t0 = time.time()
    fmt = cfg["experiment.format"]
    man = _manifest(cfg, "simulate-spde")
    man.scheme = dict(SPDE_SCHEME)
    n = cfg["spde.n_runs"]
    results = run_tasks(_spde_task, [(cfg, i) for i in range(n)], cfg["experiment.workers"])
    for index, traj in sorted(results, key=lambda r: r[0]):
        stem = out / (f"run_{index:04d}" if n > 1 else "run")
        p = write_table(f"{stem}_snapshots", ("t", "x", "m1", "m2", "m3"),
                        snapshots_to_table(traj.times, traj.grid, traj.snapshots), fmt)
        man.add_output(p, out)
        t, W = traj.wiener_path()
        p = write_table(f"{stem}_wiener", ("t", "W"), np.column_stack([t, W]), fmt)
        man.add_output(p, out)
        man.steps[str(index)] = {"steps": int(traj.dW.size), "max_defect": traj.max_defect,
                                 "max_norm_error": traj.max_norm_error,
                                 "boundary_proximity": traj.boundary_proximity}
        if traj.boundary_proximity:
            man.failures.append({"index": index, "reason": "front near boundary (unusable)"})
    man.wall_clock_s = time.time() - t0
    man.write(out)
    return EXIT_OK


def cmd_simulate_cc(cfg, out: Path) -> int:
    t0 = time.time()
    fmt = cfg["experiment.format"]
    man = _manifest(cfg, "simulate-cc")
    man.scheme = dict(CC_SCHEME)
    n = cfg["cc.n_trajectories"]
    thr = cfg["cc.w_threshold"]
    results = run_tasks(_cc_task, [(cfg, i) for i in range(n)], cfg["experiment.workers"])
    for index, traj in sorted(results, key=lambda r: r[0]):
        stem = out / f"traj_{index:04d}"
        p = write_table(stem, integrate.TRAJECTORY_COLUMNS, traj.data, fmt)
        man.add_output(p, out)
        events, _ = detect_events(traj.t, traj.w, traj.phi, thr)
        rows = [(e.start, e.end, e.peak_w, e.delta_phi) for e in events]
        p = write_csv(out / f"events_{index:04d}.csv", ("start", "end", "peak_w", "delta_phi"), rows)
        man.add_output(p, out)
        man.steps[str(index)] = {"samples": len(traj), "rejections": traj.rejections,
                                 "events": len(events)}
        if traj.failure:
            log.error("trajectory %d: %s", index, traj.failure)
            man.failures.append({"index": index, "reason": traj.failure})
    man.wall_clock_s = time.time() - t0
    man.write(out)
    return EXIT_RUNTIME if man.failures else EXIT_OK


def cmd_fit(cfg, out: Path, inputs: list[Path]) -> int:
    if not inputs:
        raise ConfigError("input", "no snapshot files given")
    t0 = time.time()
    man = _manifest(cfg, "fit")
    status = EXIT_OK
    for path in inputs:
        try:
            header, data = read_table(path)
            times, grid, values = table_to_snapshots(header, data)
        except (OSError, ValueError, KeyError) as exc:
            log.error("%s: %s", path, exc)
            man.failures.append({"input": str(path), "reason": str(exc)})
            status = EXIT_RUNTIME
            continue
        fields = [MagnetizationField(grid, v, check=False) for v in values]
        series = fit_trajectory(fields, times)
        name = path.stem.replace("_snapshots", "") + "_fitted"
        p = write_csv(out / f"{name}.csv", ("t", "w", "phi", "theta", "eta", "psi", "A1", "A2", "A3",
                                            "B1", "B2", "B3", "residual", "converged"), series.rows())
        man.add_output(p, out)
        man.steps[str(path)] = {"snapshots": len(fields),
                                "not_converged": int(np.sum(~series.converged)),
                                "flagged": int(np.sum(series.flagged)),
                                "max_residual": float(series.residual.max())}
        for k, reason in series.errors:
            man.failures.append({"input": str(path), "snapshot": k, "reason": reason})
    man.wall_clock_s = time.time() - t0
    man.write(out)
    return status


def _load_series(paths: list[Path], t_start: float):
    """Per-file dicts of the available columns, cut at ``t_start``."""
    series = []
    for path in paths:
        header, data = read_table(path)
        cols = {name: column(header, data, name) for name in header}
        if "phi" not in cols:
            raise ConfigError("input", f"{path}: no 'phi' column")
        if "t" in cols:
            keep = cols["t"] >= t_start
            cols = {k: v[keep] for k, v in cols.items()}
        series.append(cols)
    return series


def _report_entry(est=None, **extra):
    entry = {"method": None, "alpha": None, "beta": None, "scale": None, "stderr": None,
             "ks_distance": None, "p_star": None}
    if est is not None:
        entry.update(method=est.method, alpha=est.alpha, beta=est.beta, scale=est.scale,
                     stderr=est.stderr)
    entry.update(extra)
    return {k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in entry.items()}


def analyze(cfg, paths: list[Path]) -> tuple[dict, list]:
    """Run the configured estimators; returns the report and the KS curve rows."""
    a = cfg.section("analyze")
    seed = cfg["experiment.seed"]
    data = _load_series(paths, a["t_start"])
    ns, sl = a["n_segments"], a["segment_len"]
    report = {"seed": seed, "n_segments": ns, "segment_len": sl,
              "inputs": [str(p) for p in paths], "results": {}, "errors": {}, "skipped": {}}
    curve: list = []
    per_file = max(1, ns // len(data))

    def segments(key):
        # segments never straddle two input files
        blocks = []
        for d in data:
            x = d[key]
            k = min(per_file, x.size // sl)
            blocks.append(x[: k * sl])
        return np.concatenate(blocks)

    for test in a["tests"]:
        try:
            if test == "pvariation":
                res = stats.pvariation_ks_test(segments("phi"), a["p_grid"], ns, sl)
                j = int(np.argmin(res.ks_distance))
                report["results"][test] = _report_entry(
                    method="pvariation_ks", alpha=res.alpha, ks_distance=float(res.ks_distance[j]),
                    p_star=res.p_star, scale=float(res.best_scale[j]))
                curve = res.curve_rows()
            elif test == "moments":
                ens = stats.ensemble_from_segments(segments("phi"), ns, sl)
                dt = float(np.median(np.diff(data[0]["t"]))) if "t" in data[0] else 1.0
                win = a["moment_window"] or None
                est = stats.moment_scaling_test(ens, np.arange(sl) * dt, a["q_grid"], win)
                report["results"][test] = _report_entry(est, diagnostics=est.diagnostics)
            elif test in ("mle", "beta"):
                if a["tail_source"] == "f_phi" and all("f_phi" in d for d in data):
                    x = np.concatenate([d["f_phi"] for d in data])
                    source = "f_phi"
                else:
                    x = np.concatenate([np.diff(d["phi"]) for d in data])
                    source = "increments"
                if test == "beta":
                    est = stats.sign_ratio_beta(x, a["n_bootstrap"], seed)
                    report["results"][test] = _report_entry(est, source=source)
                else:
                    out = {}
                    for sign, name in ((1, "positive"), (-1, "negative")):
                        try:
                            est = stats.mle_tail_fit(sign * x[sign * x > 0], n_bootstrap=a["n_bootstrap"],
                                                     seed=seed)
                            out[name] = _report_entry(est, source=source, ks_distance=est.diagnostics["ks_distance"],
                                                      x_min=est.diagnostics["x_min"],
                                                      n_tail=est.diagnostics["n_tail"])
                        except LLGFrontError as exc:
                            out[name] = {"error": f"{type(exc).__name__}: {exc}"}
                    report["results"][test] = out
            elif test == "poisson":
                if not all("w" in d and "t" in d for d in data):
                    report["skipped"][test] = "no width column: no events to test"
                    continue
                waits = []
                for d in data:
                    _, wt = detect_events(d["t"], d["w"], d["phi"], a["w_threshold"])
                    waits.append(wt)
                waits = np.concatenate(waits)
                if waits.size == 0:
                    report["skipped"][test] = "no events detected"
                    continue
                d_ks, p = stats.poisson_interarrival_test(waits)
                report["results"][test] = _report_entry(method="poisson_ks", ks_distance=d_ks,
                                                        p_value=p, n_waits=int(waits.size))
        except LLGFrontError as exc:
            report["errors"][test] = f"{type(exc).__name__}: {exc}"
    return report, curve


def cmd_analyze(cfg, out: Path, inputs: list[Path]) -> int:
    if not inputs:
        raise ConfigError("input", "no series files given")
    t0 = time.time()
    report, curve = analyze(cfg, inputs)
    man = _manifest(cfg, "analyze")
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")
    man.add_output(out / "report.json", out)
    if curve:
        man.add_output(write_csv(out / "ks_curve.csv", ("p", "ks_min", "scale_at_min"), curve), out)
    man.wall_clock_s = time.time() - t0
    man.write(out)
    return EXIT_RUNTIME if report["errors"] and not report["results"] else EXIT_OK


def cmd_verify(cfg, out: Path | None) -> int:
    results = verifymod.run_all(cfg)
    summary = {"passed": all(r.passed for r in results), "suites": [r.to_dict() for r in results]}
    text = json.dumps(summary, indent=2, sort_keys=True)
    print(text)
    if out is not None:
        (out / "verify.json").write_text(text + "\n", encoding="utf-8")
    return EXIT_OK if summary["passed"] else EXIT_VERIFY


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI config or a run manifest to replay")
    common.add_argument("--seed", type=int, help="master seed (experiment.seed)")
    common.add_argument("--workers", type=int, help="worker processes (experiment.workers)")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--format", choices=("csv", "binary"), help="data file format")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override any config key")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="llgfront", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate-spde", parents=[common], help="run the SPDE solver")
    sub.add_parser("simulate-cc", parents=[common], help="run the collective-coordinate SDE")
    for name, what in (("fit", "snapshot files"), ("analyze", "series files")):
        sp = sub.add_parser(name, parents=[common], help=f"process {what}")
        sp.add_argument("inputs", nargs="*", type=Path)
    sub.add_parser("verify", parents=[common], help="run the oracle suites")
    sub.add_parser("schema", parents=[common], help="print the config schema")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {"experiment.seed": args.seed, "experiment.workers": args.workers,
                 "experiment.format": args.format}
    try:
        for item in args.set:
            if "=" not in item:
                raise ConfigError(item, "expected SECTION.KEY=VALUE")
            key, value = item.split("=", 1)
            overrides[key.strip()] = value
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.command == "schema":
        print(json.dumps(schema_document(), indent=2))
        return EXIT_OK
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "simulate-spde":
            return cmd_simulate_spde(cfg, out)
        if args.command == "simulate-cc":
            return cmd_simulate_cc(cfg, out)
        if args.command == "fit":
            return cmd_fit(cfg, out, args.inputs)
        if args.command == "analyze":
            return cmd_analyze(cfg, out, args.inputs)
        return cmd_verify(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (LLGFrontError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
