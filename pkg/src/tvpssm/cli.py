"""Command-line surface: fit, forecast, validate, simulate, check.

Configuration comes from defaults, then an optional JSON config file,
then command-line flags (strongest).  The defaults reproduce the
reference protocol exactly: 50,000 iterations, 30,000 burn-in, horizon
12, quantile levels 0.025/0.975, and the standard hyperparameters with
the empirical-mean policy for xi0.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical
failure, 4 check failure.  The default output directory can be set with
the TVPSSM_OUTDIR environment variable.  With several inputs, --jobs N
fits them in parallel; input k uses seed ``seed + k`` and writes into its
own subdirectory.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .diagnostics import (
    geweke_joint_test,
    geweke_test_hyper,
    run_oracle_suite,
    summary_stats,
    trace_export,
)
from .forecast import forecast_paths, forecast_summary, holdout_validate
from .gibbs import NumericalError, forecast_rng, run_chain
from .io import (
    DataFormatError,
    load_series,
    write_forecast_csv,
    write_histogram_csv,
    write_series,
    write_validation_csv,
)
from .model import Hyperparameters, McmcConfig, ModelKind
from .synthetic import SyntheticSpec, generate_seasonal_series
from . import _kernels

HYPER_KEYS = ("a", "b", "c_mu", "c_0", "c_bt0", "c_bt1", "c_bts",
              "c_b0", "c_b1", "c_bs", "c_x", "c_y", "xi0")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3
EXIT_CHECK = 4


class ConfigError(ValueError):
    pass


@dataclasses.dataclass
class RunConfig:
    """Resolved configuration of one run."""

    kind: ModelKind = ModelKind.SEASONAL
    hyper: Hyperparameters = dataclasses.field(default_factory=Hyperparameters)
    mcmc: McmcConfig = dataclasses.field(default_factory=McmcConfig)
    period: int = 12
    horizon: int = 12
    levels: tuple[float, float] = (0.025, 0.975)
    inputs: list[str] = dataclasses.field(default_factory=list)
    outdir: str = ""
    select: list[str] = dataclasses.field(default_factory=lambda: ["tau"])
    compare: bool = False
    histogram: bool = False
    bins: int = 30
    jobs: int = 1


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"config file {path}: top level must be an object")
    return cfg


def _parse_hyper_overrides(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--hyper expects key=value, got {pair!r}")
        key, _, val = pair.partition("=")
        key = key.strip()
        if key not in HYPER_KEYS:
            raise ConfigError(
                f"unknown hyperparameter {key!r}; valid: {', '.join(HYPER_KEYS)}")
        try:
            out[key] = None if val.strip().lower() in ("none", "empirical") \
                else float(val)
        except ValueError:
            raise ConfigError(f"--hyper {key}: cannot parse value {val!r}") from None
    return out


def _resolve(args) -> RunConfig:
    file_cfg = _load_config_file(args.config) if args.config else {}

    hyper_kw = dict(file_cfg.get("hyper", {}))
    unknown = set(hyper_kw) - set(HYPER_KEYS)
    if unknown:
        raise ConfigError(f"config file: unknown hyperparameters {sorted(unknown)}")
    hyper_kw.update(_parse_hyper_overrides(getattr(args, "hyper", []) or []))

    mcmc_kw = dict(file_cfg.get("mcmc", {}))
    for flag, key in (("iters", "n_iter"), ("burnin", "burn_in"),
                      ("thin", "thin"), ("seed", "seed")):
        v = getattr(args, flag, None)
        if v is not None:
            mcmc_kw[key] = v

    def pick(flag, key, default):
        v = getattr(args, flag, None)
        if v is not None:
            return v
        return file_cfg.get(key, default)

    kind_str = pick("kind", "kind", "seasonal")
    try:
        kind = ModelKind(kind_str)
    except ValueError:
        raise ConfigError(f"unknown model kind {kind_str!r}") from None

    levels = pick("levels", "levels", (0.025, 0.975))
    if len(levels) != 2:
        raise ConfigError("levels must be two probabilities")
    levels = (float(levels[0]), float(levels[1]))
    if not 0.0 <= levels[0] <= levels[1] <= 1.0:
        raise ConfigError(f"invalid quantile levels {levels}")

    inputs = getattr(args, "input", None)
    if inputs is None:
        file_input = file_cfg.get("input")
        inputs = [file_input] if file_input else []
    inputs = [str(p) for p in inputs]
    outdir = pick("outdir", "outdir", os.environ.get("TVPSSM_OUTDIR", "tvpssm-out"))

    try:
        cfg = RunConfig(
            kind=kind,
            hyper=Hyperparameters(**hyper_kw),
            mcmc=McmcConfig(**mcmc_kw),
            period=int(pick("period", "period", 12)),
            horizon=int(pick("horizon", "horizon", 12)),
            levels=levels,
            inputs=inputs,
            outdir=str(outdir),
            select=list(pick("select", "select", ["tau"])),
            compare=bool(getattr(args, "compare", False) or file_cfg.get("compare", False)),
            histogram=bool(getattr(args, "histogram", False) or file_cfg.get("histogram", False)),
            bins=int(pick("bins", "bins", 30)),
            jobs=int(pick("jobs", "jobs", 1)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if cfg.horizon < 1:
        raise ConfigError("horizon must be at least 1")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be at least 1")
    return cfg


def _hyper_dict(hyper: Hyperparameters, xi0_resolved: float | None = None) -> dict:
    d = {k: getattr(hyper, k) for k in HYPER_KEYS}
    if xi0_resolved is not None:
        d["xi0_resolved"] = xi0_resolved
    return d


def _manifest(cfg: RunConfig, command: str, series, xi0, timings, outputs) -> dict:
    return {
        "command": command,
        "package_version": __version__,
        "input": series.label,
        "T": series.n,
        "period": series.period,
        "kind": cfg.kind.value,
        "hyper": _hyper_dict(cfg.hyper, xi0),
        "mcmc": {"n_iter": cfg.mcmc.n_iter, "burn_in": cfg.mcmc.burn_in,
                 "thin": cfg.mcmc.thin, "seed": cfg.mcmc.seed},
        "horizon": cfg.horizon,
        "levels": list(cfg.levels),
        "n_retained": cfg.mcmc.n_retained,
        "timings": timings,
        "outputs": outputs,
    }


def _write_manifest(manifest: dict, outdir: Path) -> None:
    with open(outdir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_summary_csv(draws, selection, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("quantity,mean,sd,q025,median,q975\n")
        for name in selection:
            st = summary_stats(draws, name)
            fh.write(f"{name},{st.mean:.17g},{st.sd:.17g},"
                     f"{st.q025:.17g},{st.median:.17g},{st.q975:.17g}\n")


def _per_input_jobs(cfg: RunConfig):
    if not cfg.inputs:
        raise ConfigError("no input series given (use --input)")
    jobs = []
    for k, inp in enumerate(cfg.inputs):
        sub = dataclasses.replace(
            cfg,
            inputs=[inp],
            mcmc=dataclasses.replace(cfg.mcmc, seed=cfg.mcmc.seed + k),
            outdir=str(Path(cfg.outdir) / Path(inp).stem)
            if len(cfg.inputs) > 1 else cfg.outdir,
        )
        jobs.append(sub)
    return jobs


def _run_jobs(worker, cfg: RunConfig) -> int:
    jobs = _per_input_jobs(cfg)
    if cfg.jobs == 1 or len(jobs) == 1:
        for job in jobs:
            worker(job)
        return EXIT_OK
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        list(pool.map(_WorkerCall(worker), jobs))
    return EXIT_OK


class _WorkerCall:
    # Top-level callable so ProcessPoolExecutor can pickle it.
    def __init__(self, fn):
        self.fn = fn

    def __call__(self, job):
        return self.fn(job)


def _fit_one(cfg: RunConfig) -> None:
    t_start = time.time()
    series = load_series(cfg.inputs[0], period=cfg.period)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    draws = run_chain(series, cfg.hyper, cfg.kind, cfg.mcmc)
    sampling_seconds = time.time() - t0
    trace_export(draws, cfg.select, outdir / "trace.csv")
    _write_summary_csv(draws, cfg.select, outdir / "summary.csv")
    timings = {"sampling_seconds": sampling_seconds,
               "total_seconds": time.time() - t_start}
    manifest = _manifest(cfg, "fit", series, draws.xi0, timings,
                         ["trace.csv", "summary.csv"])
    _write_manifest(manifest, outdir)
    print(f"fit {series.label}: {draws.n_draws} draws retained in "
          f"{sampling_seconds:.1f}s -> {outdir}")


def _forecast_one(cfg: RunConfig) -> None:
    t_start = time.time()
    series = load_series(cfg.inputs[0], period=cfg.period)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    draws = run_chain(series, cfg.hyper, cfg.kind, cfg.mcmc)
    sampling_seconds = time.time() - t0
    paths = forecast_paths(draws, series, cfg.hyper, cfg.kind, cfg.horizon,
                           forecast_rng(cfg.mcmc.seed))
    summ = forecast_summary(paths, cfg.levels)
    write_forecast_csv(summ, outdir / "forecast.csv")
    outputs = ["forecast.csv"]
    if cfg.histogram:
        write_histogram_csv(paths, outdir / "histogram.csv", cfg.bins)
        outputs.append("histogram.csv")
    timings = {"sampling_seconds": sampling_seconds,
               "total_seconds": time.time() - t_start}
    manifest = _manifest(cfg, "forecast", series, draws.xi0, timings, outputs)
    _write_manifest(manifest, outdir)
    print(f"forecast {series.label}: horizon {cfg.horizon} -> {outdir}")


def _validate_one(cfg: RunConfig) -> None:
    t_start = time.time()
    series = load_series(cfg.inputs[0], period=cfg.period)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    kinds = [cfg.kind]
    if cfg.compare:
        kinds = [ModelKind.SEASONAL, ModelKind.BASELINE]
    reports = {}
    for kind in kinds:
        reports[kind.value] = holdout_validate(
            series, cfg.hyper, kind, cfg.mcmc, cfg.horizon, cfg.levels)
    write_validation_csv(reports, outdir / "validation.csv")
    timings = {"total_seconds": time.time() - t_start}
    manifest = _manifest(cfg, "validate", series, None, timings,
                         ["validation.csv"])
    manifest["rmse"] = {k: r.rmse for k, r in reports.items()}
    manifest["coverage"] = {k: f"{r.n_covered}/{r.n_scored}"
                            for k, r in reports.items()}
    _write_manifest(manifest, outdir)
    for k, r in reports.items():
        print(f"validate {series.label} [{k}]: rmse={r.rmse:.4f} "
              f"coverage={r.n_covered}/{r.n_scored}")


def _cmd_simulate(args) -> int:
    try:
        spec = SyntheticSpec(
            n=args.length, period=args.period, trend_slope=args.trend_slope,
            seasonal_amplitude=args.amplitude, noise_sd=args.noise_sd,
            base_level=args.base_level, missing_fraction=args.missing_fraction)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    series = generate_seasonal_series(spec, args.seed)
    out = Path(args.out)
    if out.parent != Path("."):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_series(series, out)
    print(f"simulate: wrote {series.n} rows ({series.n_missing} missing) to {out}")
    return EXIT_OK


def _cmd_check(args) -> int:
    t0 = time.time()
    fault = _kernels.FAULT_B0_VARIANCE if args.inject_fault else _kernels.FAULT_NONE
    reports = run_oracle_suite(
        n_states=args.oracle_states, T=args.t_small, period=12,
        kind=ModelKind.SEASONAL, seed=args.seed)
    worst = max(reports, key=lambda r: r.max_abs_error)
    oracle_ok = all(r.ok for r in reports)
    print(f"oracle: {len(reports)} checks, max |log-density error| = "
          f"{worst.max_abs_error:.3g} at {worst.target}"
          + (f"[{worst.t}]" if worst.t is not None else "")
          + f"  [{'ok' if oracle_ok else 'FAIL'}]")

    hyper = geweke_test_hyper()
    geweke_ok = True
    results = {}
    for kind, T_small, label in ((ModelKind.SEASONAL, args.t_small, "seasonal"),
                                 (ModelKind.BASELINE, 15, "baseline")):
        rep = geweke_joint_test(
            hyper, kind, T_small, n_samples=args.geweke_samples,
            seed=args.seed, _fault=fault)
        results[label] = rep
        flag = "ok" if rep.ok else "FAIL"
        print(f"geweke [{label}]: max |z| = {rep.max_abs_z:.2f} over "
              f"{', '.join(rep.statistics)}  [{flag}]")
        for name, z in zip(rep.statistics, rep.z):
            print(f"    z[{name}] = {z:+.2f}")
        geweke_ok = geweke_ok and rep.ok

    ok = oracle_ok and geweke_ok
    if args.outdir:
        outdir = Path(args.outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        payload = {
            "pass": bool(ok),
            "elapsed_seconds": time.time() - t0,
            "oracle": [
                {"target": r.target, "t": r.t, "max_abs_error": r.max_abs_error}
                for r in reports
            ],
            "geweke": {
                label: {"statistics": list(rep.statistics),
                        "z": [float(z) for z in rep.z]}
                for label, rep in results.items()
            },
        }
        with open(outdir / "check.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"check: {'PASS' if ok else 'FAIL'} ({time.time() - t0:.1f}s)")
    return EXIT_OK if ok else EXIT_CHECK


def _add_common(p: argparse.ArgumentParser, with_mcmc: bool = True) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--input", nargs="+", help="input series CSV file(s)")
    p.add_argument("--outdir", help="output directory "
                   "(default $TVPSSM_OUTDIR or ./tvpssm-out)")
    p.add_argument("--kind", choices=["seasonal", "baseline"])
    p.add_argument("--period", type=int, help="season length (default 12)")
    p.add_argument("--hyper", action="append", metavar="KEY=VALUE",
                   help="override one hyperparameter (repeatable)")
    p.add_argument("--jobs", type=int, help="parallel workers across inputs")
    if with_mcmc:
        p.add_argument("--iters", type=int, help="MCMC iterations (default 50000)")
        p.add_argument("--burnin", type=int, help="burn-in (default 30000)")
        p.add_argument("--thin", type=int, help="thinning (default 1)")
        p.add_argument("--seed", type=int, help="chain seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvpssm",
        description="Seasonally-adjusted time-varying-parameter state-space "
                    "forecasting via Gibbs sampling.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the model and export traces/summaries")
    _add_common(p)
    p.add_argument("--select", nargs="+",
                   help="quantities to trace, e.g. tau x[12] b1[288]")

    p = sub.add_parser("forecast", help="fit, then forecast with credible bounds")
    _add_common(p)
    p.add_argument("--horizon", type=int, help="steps ahead (default 12)")
    p.add_argument("--levels", type=float, nargs=2, metavar=("LO", "HI"),
                   help="quantile levels (default 0.025 0.975)")
    p.add_argument("--histogram", action="store_true",
                   help="also write per-horizon histogram bin counts")
    p.add_argument("--bins", type=int, help="histogram bins (default 30)")

    p = sub.add_parser("validate", help="holdout cross-validation")
    _add_common(p)
    p.add_argument("--horizon", type=int, help="holdout length (default 12)")
    p.add_argument("--levels", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--compare", action="store_true",
                   help="score seasonal and baseline side by side")

    p = sub.add_parser("simulate", help="write a synthetic seasonal series")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--length", type=int, default=132)
    p.add_argument("--period", type=int, default=12)
    p.add_argument("--trend-slope", type=float, default=0.005)
    p.add_argument("--amplitude", type=float, default=8.0)
    p.add_argument("--noise-sd", type=float, default=1.0)
    p.add_argument("--base-level", type=float, default=26.0)
    p.add_argument("--missing-fraction", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("check", help="run the sampler verification suite")
    p.add_argument("--oracle-states", type=int, default=20,
                   help="randomized states per conditional family")
    p.add_argument("--geweke-samples", type=int, default=50_000)
    p.add_argument("--t-small", type=int, default=26)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outdir", help="where to write check.json")
    p.add_argument("--inject-fault", action="store_true",
                   help=argparse.SUPPRESS)  # harness sensitivity fixture
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "check":
            return _cmd_check(args)
        cfg = _resolve(args)
        worker = {"fit": _fit_one, "forecast": _forecast_one,
                  "validate": _validate_one}[args.command]
        return _run_jobs(worker, cfg)
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, TypeError) as exc:
        # Invalid McmcConfig/Hyperparameters etc. surface as ValueError.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
