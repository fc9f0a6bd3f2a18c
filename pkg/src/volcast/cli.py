"""Command-line interface.

Subcommands: measures, fit, forecast, test, simulate, report. Every run
writes a manifest (config, seed, package versions, sha256 of inputs)
next to its outputs so results can be reproduced exactly. Exit codes:
2 for configuration problems, 3 for data problems, 4 for numerical
failures.

Options may also come from a flat key=value config file via --config;
explicit command-line flags win, unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .epa_tests import cw_test, dm_test, gw_decision_rule, gw_test
from .errors import (
    ConfigError,
    DataError,
    InvalidConfig,
    NumericalError,
    VolcastError,
)
from .forecast_engine import (
    PipelineSpec,
    SchemeConfig,
    read_forecast_run,
    run_firms,
    write_forecast_run,
)
from .har_features import ModelSpec, build_design, destandardize, standardize
from .panel_data import (
    build_realized_panel,
    load_intraday,
    load_measures_panel,
    write_daily_rv,
    write_intraday,
    write_measures_panel,
)
from .report import build_manifest, write_manifest, write_tables
from .shrinkage import PenaltySpec, fit_cv, fit_ols
from .simulate import DgpConfig, simulate_har_panel, simulate_paths

PENALTIES = ("ols", "lasso", "alasso", "enet")
SCOPE_ALIASES = {"bench": "benchmark", "benchmark": "benchmark",
                 "cross": "cross_section", "cross_section": "cross_section"}


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


# converters for config-file values, per option dest
_CONVERTERS = {
    "seed": int, "threads": int, "window": int, "horizon": int,
    "cv": int, "grid": int, "cv_refresh": int,
    "n_firms": int, "n_days": int, "n_intraday": int, "burn_in": int,
    "alpha": float, "eta": float, "gamma": float, "lam": float,
    "mu": float, "sigma2": float, "kappa": float, "theta": float, "xi": float,
    "jump_intensity": float, "jump_sd": float, "noise_sd": float,
    "floor_zero": lambda s: s.lower() in ("1", "true", "yes"),
}


def read_config_file(path) -> dict:
    """Parse a flat key=value file; '#' starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidConfig(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _apply_config(args_ns, config: dict, parser_dests: set[str], argv: list[str]):
    explicit = {a.split("=", 1)[0].lstrip("-").replace("-", "_")
                for a in argv if a.startswith("--")}
    for key, raw in config.items():
        if key not in parser_dests:
            raise InvalidConfig(f"unknown config key {key!r}")
        if key in explicit:
            continue
        conv = _CONVERTERS.get(key, str)
        try:
            setattr(args_ns, key, conv(raw))
        except ValueError as exc:
            raise InvalidConfig(f"bad value for config key {key!r}: {raw!r}") from exc
    return args_ns


def _resolve_threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("VOLCAST_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise InvalidConfig(f"VOLCAST_THREADS must be an integer, got {env!r}") from exc
    return 1


def parse_pipeline(text: str, scope: str, eta: float, gamma: float, lam=None) -> PipelineSpec:
    """Parse 'variant:penalty' (e.g. har:ols, harq:lasso) into a pipeline."""
    parts = text.lower().split(":")
    if len(parts) != 2:
        raise InvalidConfig(f"expected variant:penalty, got {text!r}")
    variant, penalty = parts
    if penalty not in PENALTIES:
        raise InvalidConfig(f"unknown penalty {penalty!r}; pick one of {PENALTIES}")
    model = ModelSpec(variant=variant, scope=SCOPE_ALIASES[scope])
    pen = None if penalty == "ols" else PenaltySpec(kind=penalty, lam=lam, eta=eta, gamma=gamma)
    return PipelineSpec(model=model, penalty=pen)


def _add_common(sp):
    sp.add_argument("--seed", type=int, default=0, help="base RNG seed")
    sp.add_argument("--threads", type=_positive_int, default=None,
                    help="worker threads (default: VOLCAST_THREADS or 1)")
    sp.add_argument("--config", default=None, help="flat key=value config file")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="volcast", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"volcast {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("measures", help="intraday returns -> daily measure panel")
    sp.add_argument("--in", dest="infile", required=True, help="long intraday CSV")
    sp.add_argument("--out", required=True, help="output measures CSV")
    _add_common(sp)

    sp = sub.add_parser("fit", help="full-sample fit of one model for one firm")
    sp.add_argument("--in", dest="infile", required=True, help="measures or daily rv CSV")
    sp.add_argument("--firm", required=True)
    sp.add_argument("--spec", default="har", help="har|harq|harq_f|har_j|char")
    sp.add_argument("--scope", default="cross", choices=sorted(SCOPE_ALIASES))
    sp.add_argument("--penalty", default="lasso", choices=PENALTIES)
    sp.add_argument("--h", dest="horizon", type=_positive_int, default=1)
    sp.add_argument("--cv", type=_positive_int, default=5, help="CV folds")
    sp.add_argument("--grid", type=_positive_int, default=100, help="lambda grid size")
    sp.add_argument("--lam", type=float, default=None, help="fixed lambda (skips CV)")
    sp.add_argument("--eta", type=float, default=0.5)
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--out", default=".", help="output directory")
    _add_common(sp)

    sp = sub.add_parser("forecast", help="rolling/expanding two-model comparison")
    sp.add_argument("--in", dest="infile", required=True, help="measures or daily rv CSV")
    sp.add_argument("--bench", default="har:ols", help="benchmark variant:penalty")
    sp.add_argument("--model", default="har:lasso", help="challenger variant:penalty")
    sp.add_argument("--bench-scope", default="bench", choices=sorted(SCOPE_ALIASES))
    sp.add_argument("--model-scope", default="cross", choices=sorted(SCOPE_ALIASES))
    sp.add_argument("--scheme", default="rolling", choices=("rolling", "expanding"))
    sp.add_argument("--window", type=_positive_int, default=1000)
    sp.add_argument("--h", dest="horizon", type=_positive_int, default=1)
    sp.add_argument("--firms", default="all", help="'all' or comma-separated names")
    sp.add_argument("--loss", default="squared", choices=("squared", "absolute"))
    sp.add_argument("--cv", type=_positive_int, default=5)
    sp.add_argument("--grid", type=_positive_int, default=100)
    sp.add_argument("--cv-refresh", dest="cv_refresh", type=_positive_int, default=1)
    sp.add_argument("--eta", type=float, default=0.5)
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--floor-zero", dest="floor_zero", action="store_true")
    sp.add_argument("--out", required=True, help="output directory for run CSVs")
    _add_common(sp)

    sp = sub.add_parser("test", help="EPA tests on stored forecast runs")
    sp.add_argument("--runs", required=True, help="directory written by `volcast forecast`")
    sp.add_argument("--tests", default="dm,cw,gw", help="comma list out of dm,cw,gw")
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--gw-instruments", dest="gw_instruments", default="lagged",
                    choices=("constant", "lagged"))
    sp.add_argument("--out", required=True, help="output directory for tables")
    _add_common(sp)

    sp = sub.add_parser("simulate", help="generate synthetic panels with known truth")
    sp.add_argument("--preset", default="sv-jumps",
                    choices=("sv-jumps", "constant-vol", "har-panel"))
    sp.add_argument("--N", "--n-firms", dest="n_firms", type=_positive_int, default=10)
    sp.add_argument("--T", "--days", dest="n_days", type=_positive_int, default=1500)
    sp.add_argument("--M", "--intraday", dest="n_intraday", type=_positive_int, default=390)
    sp.add_argument("--mu", type=float, default=0.0)
    sp.add_argument("--sigma2", type=float, default=1.0)
    sp.add_argument("--kappa", type=float, default=5.0)
    sp.add_argument("--theta", type=float, default=1.0)
    sp.add_argument("--xi", type=float, default=0.5)
    sp.add_argument("--jump-intensity", dest="jump_intensity", type=float, default=None)
    sp.add_argument("--jump-sd", dest="jump_sd", type=float, default=None)
    sp.add_argument("--noise-sd", dest="noise_sd", type=float, default=0.25)
    sp.add_argument("--burn-in", dest="burn_in", type=_positive_int, default=500)
    sp.add_argument("--out", required=True, help="output directory")
    _add_common(sp)

    sp = sub.add_parser("report", help="re-render stored EPA results")
    sp.add_argument("--results", required=True, help="epa_results.json from `volcast test`")
    sp.add_argument("--format", dest="fmt", default="text", choices=("text", "csv", "json"))
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--out", required=True, help="output directory")
    _add_common(sp)
    return p


# -- subcommand bodies --------------------------------------------------------


def _cmd_measures(args) -> None:
    panel = build_realized_panel(load_intraday(args.infile))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_measures_panel(panel, out)
    manifest = build_manifest(
        "measures", {"in": args.infile, "out": str(out)}, args.seed,
        [args.infile], [out.name],
    )
    write_manifest(manifest, out.with_suffix(out.suffix + ".manifest.json"))


def _cmd_fit(args) -> None:
    panel = load_measures_panel(args.infile)
    spec = ModelSpec(
        variant=args.spec.lower(), scope=SCOPE_ALIASES[args.scope], horizon=args.horizon
    )
    design = build_design(panel, args.firm, spec)
    if args.penalty == "ols":
        ols = fit_ols(design.X, design.y)
        intercept, coef, lam = ols.intercept, ols.coef, None
    else:
        sd = standardize(design.X, design.columns)
        pen = PenaltySpec(kind=args.penalty, lam=args.lam, eta=args.eta, gamma=args.gamma)
        fit, cv = fit_cv(sd.X, design.y, pen, n_folds=args.cv, n_grid=args.grid)
        intercept, coef_kept = destandardize(fit.intercept, fit.coef, sd.center, sd.scale)
        coef = sd.expand(coef_kept, design.X.shape[1])
        lam = fit.lam
    active = [c for c, b in zip(design.columns, coef) if b != 0.0]
    payload = {
        "firm": args.firm, "spec": spec.variant, "scope": spec.scope,
        "penalty": args.penalty, "horizon": args.horizon,
        "intercept": float(intercept), "lambda": lam,
        "columns": design.columns, "coef": [float(b) for b in coef],
        "active": active, "n_rows": design.n_rows,
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"fit_{args.firm}_{spec.variant}-{args.penalty}"
    (out / f"{stem}.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    with open(out / f"{stem}.csv", "w") as fh:
        fh.write("column,coef\n")
        fh.write(f"(intercept),{intercept!r}\n")
        for c, b in zip(design.columns, coef):
            fh.write(f"\"{c}\",{b!r}\n")
    manifest = build_manifest(
        "fit", {k: getattr(args, k) for k in
                ("infile", "firm", "spec", "scope", "penalty", "horizon",
                 "cv", "grid", "lam", "eta", "gamma")},
        args.seed, [args.infile], [f"{stem}.json", f"{stem}.csv"],
    )
    write_manifest(manifest, out / "manifest.json")


def _cmd_forecast(args) -> None:
    panel = load_measures_panel(args.infile)
    firms = panel.firms if args.firms == "all" else [
        f.strip() for f in args.firms.split(",") if f.strip()
    ]
    bench = parse_pipeline(args.bench, args.bench_scope, args.eta, args.gamma)
    model = parse_pipeline(args.model, args.model_scope, args.eta, args.gamma)
    cfg = SchemeConfig(
        scheme=args.scheme, window=args.window, horizon=args.horizon,
        loss=args.loss, cv_folds=args.cv, n_grid=args.grid,
        cv_refresh=args.cv_refresh, floor_zero=args.floor_zero,
    )
    runs = run_firms(panel, firms, bench, model, cfg,
                     seed=args.seed, threads=_resolve_threads(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    for firm in firms:
        run = runs[firm]
        name = f"run_{firm}.csv"
        write_forecast_run(run, out / name)
        files[name] = {
            "firm": firm, "label1": run.label1, "label2": run.label2,
            "scheme": run.scheme, "window": run.window,
            "horizon": run.horizon, "loss": run.loss, "n": run.n,
        }
    manifest = build_manifest(
        "forecast",
        {k: getattr(args, k) for k in
         ("infile", "bench", "model", "bench_scope", "model_scope", "scheme",
          "window", "horizon", "firms", "loss", "cv", "grid", "cv_refresh",
          "eta", "gamma", "floor_zero")},
        args.seed, [args.infile], sorted(files),
    )
    manifest["runs"] = files
    write_manifest(manifest, out / "manifest.json")


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise DataError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"cannot parse JSON {path}: {exc}") from exc


def _load_runs(runs_dir: Path):
    mf_path = runs_dir / "manifest.json"
    if mf_path.exists():
        meta = _read_json(mf_path).get("runs", {})
    else:
        meta = {p.name: {"firm": p.stem.removeprefix("run_")}
                for p in sorted(runs_dir.glob("run_*.csv"))}
    if not meta:
        raise DataError(f"no forecast runs found under {runs_dir}")
    return [read_forecast_run(runs_dir / name, **info) for name, info in sorted(meta.items())]


def _cmd_test(args) -> None:
    tests = [t.strip() for t in args.tests.split(",") if t.strip()]
    for t in tests:
        if t not in ("dm", "cw", "gw"):
            raise InvalidConfig(f"unknown test {t!r}")
    runs = _load_runs(Path(args.runs))
    records, decisions = [], []
    for run in runs:
        # nesting sanity: the CW adjustment can only raise the mean differential
        if run.loss == "squared":
            gap = float(np.mean((run.f1 - run.f2) ** 2))
            if not gap >= -1e-12:
                raise NumericalError("CW adjustment turned negative; inputs corrupt")
        base = {"firm": run.firm, "model": run.label2, "n": run.n}
        if "dm" in tests:
            r = dm_test(run.L1, run.L2, h=run.horizon)
            records.append({**base, "test": "dm", "statistic": r.statistic,
                            "p_value": r.p_value, "sided": r.sided})
        if "cw" in tests:
            r = cw_test(run.e1, run.e2, run.f1, run.f2, h=run.horizon)
            records.append({**base, "test": "cw", "statistic": r.statistic,
                            "p_value": r.p_value, "sided": r.sided})
        if "gw" in tests:
            r = gw_test(run.d, scheme=run.scheme, instruments=args.gw_instruments)
            records.append({**base, "test": "gw", "statistic": r.statistic,
                            "p_value": r.p_value, "sided": r.sided})
            rule = gw_decision_rule(run.d, instruments=args.gw_instruments)
            decisions.append({
                "firm": run.firm, "model": run.label2, "choice": rule.choice,
                "predicted_loss_diff": rule.predicted,
            })
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    written += write_tables(records, out, "json", args.alpha)
    written += write_tables(records, out, "csv", args.alpha)
    written += write_tables(records, out, "text", args.alpha)
    if decisions:
        with open(out / "decisions.csv", "w") as fh:
            fh.write("firm,model,choice,predicted_loss_diff\n")
            for d in sorted(decisions, key=lambda r: (r["firm"], r["model"])):
                fh.write(f"{d['firm']},{d['model']},{d['choice']},{d['predicted_loss_diff']!r}\n")
        written.append("decisions.csv")
    manifest = build_manifest(
        "test", {"runs": args.runs, "tests": args.tests, "alpha": args.alpha,
                 "gw_instruments": args.gw_instruments},
        args.seed, sorted(str(p) for p in Path(args.runs).glob("*.csv")), written,
    )
    write_manifest(manifest, out / "manifest.json")


def _cmd_simulate(args) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    preset = args.preset
    jump_intensity = args.jump_intensity
    jump_sd = args.jump_sd
    if preset == "sv-jumps":
        if jump_intensity is None:
            jump_intensity = 1.0
        if jump_sd is None:
            jump_sd = 0.5
        vol_model = "cir"
    else:
        jump_intensity = jump_intensity or 0.0
        jump_sd = jump_sd or 0.0
        vol_model = "constant"
    cfg_kwargs = dict(
        n_firms=args.n_firms, n_days=args.n_days, n_intraday=args.n_intraday,
        seed=args.seed, mu=args.mu, vol_model=vol_model, sigma2=args.sigma2,
        kappa=args.kappa, theta=args.theta, xi=args.xi,
        jump_intensity=jump_intensity, jump_sd=jump_sd,
        noise_sd=args.noise_sd, burn_in=args.burn_in,
    )
    cfg = DgpConfig(**cfg_kwargs)
    if preset == "har-panel":
        panel, truth = simulate_har_panel(cfg)
        write_daily_rv(panel, out / "daily_rv.csv")
        (out / "truth.json").write_text(json.dumps(
            {"intercepts": truth["intercepts"].tolist(),
             "phi": truth["phi"].tolist(), "columns": truth["columns"]},
            indent=2, sort_keys=True) + "\n")
        outputs = ["daily_rv.csv", "truth.json"]
    else:
        panel, truth = simulate_paths(cfg)
        write_intraday(panel, out / "intraday.csv")
        truth.to_csv(out / "truth.csv", index=False)
        outputs = ["intraday.csv", "truth.csv"]
    manifest = build_manifest(
        "simulate", {"preset": preset, **{k: v for k, v in cfg_kwargs.items()}},
        args.seed, [], outputs,
    )
    write_manifest(manifest, out / "manifest.json")


def _cmd_report(args) -> None:
    records = _read_json(args.results)
    if not isinstance(records, list):
        raise DataError(f"{args.results} does not hold a list of EPA records")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = write_tables(records, out, args.fmt, args.alpha)
    manifest = build_manifest(
        "report", {"results": args.results, "format": args.fmt, "alpha": args.alpha},
        args.seed, [args.results], written,
    )
    write_manifest(manifest, out / "manifest.json")


_HANDLERS = {
    "measures": _cmd_measures, "fit": _cmd_fit, "forecast": _cmd_forecast,
    "test": _cmd_test, "simulate": _cmd_simulate, "report": _cmd_report,
}


def run_cli(argv: list[str]) -> None:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        dests = set(vars(args))
        _apply_config(args, read_config_file(args.config), dests, argv)
    _HANDLERS[args.command](args)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        run_cli(argv)
    except ConfigError as exc:
        print(f"volcast: config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"volcast: data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"volcast: numerical failure: {exc}", file=sys.stderr)
        return 4
    except VolcastError as exc:
        print(f"volcast: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
