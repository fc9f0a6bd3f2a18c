"""Out-of-sample forecast comparison engine.

Both pipelines (benchmark and challenger) are refit at every origin on
training rows whose targets are already observable there, so nothing
from the evaluation period leaks into a fit:

    origin s uses rows s-h-P+1 .. s-h   (rolling, window P)
                or rows 0 .. s-h        (expanding, first fit has P rows)

and forecasts the row-s target. A design with T usable rows therefore
yields n = T - P - h + 1 forecasts (T - P when h = 1). Standardization
and penalty-weight pilots are recomputed from each window's training
rows; the cross-validated lambda can be refreshed every `cv_refresh`
origins to trade compute for adaptivity.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from .errors import (
    EmptySequence,
    InsufficientWindow,
    InvalidConfig,
    MissingColumn,
    NonFiniteValue,
)
from .har_features import ModelSpec, build_design, destandardize, standardize
from .panel_data import RealizedPanel, read_csv_checked
from .shrinkage import PenaltySpec, cross_validate, fit_ols, fit_penalized, lambda_grid, _resolve_weights

SCHEMES = ("rolling", "expanding")
LOSSES = ("squared", "absolute")


@dataclass(frozen=True)
class SchemeConfig:
    """How the out-of-sample exercise walks through time."""

    scheme: str = "rolling"
    window: int = 1000          # estimation-window size P
    horizon: int = 1
    loss: str = "squared"
    cv_folds: int = 5
    n_grid: int = 100
    cv_refresh: int = 1         # re-select lambda every this many origins
    floor_zero: bool = False    # truncate negative forecasts at zero

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise InvalidConfig(f"unknown scheme {self.scheme!r}")
        if self.loss not in LOSSES:
            raise InvalidConfig(f"unknown loss {self.loss!r}")
        if self.window < 2:
            raise InvalidConfig(f"window must be >= 2, got {self.window}")
        if self.horizon < 1:
            raise InvalidConfig(f"horizon must be >= 1, got {self.horizon}")
        if self.cv_folds < 2:
            raise InvalidConfig(f"cv_folds must be >= 2, got {self.cv_folds}")
        if self.n_grid < 1 or self.cv_refresh < 1:
            raise InvalidConfig("n_grid and cv_refresh must be >= 1")


@dataclass(frozen=True)
class PipelineSpec:
    """A model family plus how its coefficients are estimated."""

    model: ModelSpec
    penalty: PenaltySpec | None = None   # None -> plain OLS

    @property
    def label(self) -> str:
        pen = "ols" if self.penalty is None else self.penalty.kind
        scope = "x" if self.model.scope == "cross_section" else ""
        return f"{self.model.variant}{scope}:{pen}"


@dataclass
class ForecastRun:
    """Aligned forecast/loss sequences for one firm and one model pair."""

    firm: str
    dates: list[str]        # dates at which each target completes
    actual: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    d: np.ndarray           # L1 - L2; positive means the challenger won
    label1: str = "bench"
    label2: str = "model"
    scheme: str = "rolling"
    window: int = 0
    horizon: int = 1
    loss: str = "squared"
    lam1: np.ndarray | None = None   # per-origin lambda of pipeline 1 (NaN for OLS)
    lam2: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.actual.size

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "date": self.dates, "actual": self.actual,
                "f1": self.f1, "f2": self.f2,
                "e1": self.e1, "e2": self.e2,
                "L1": self.L1, "L2": self.L2, "d": self.d,
            }
        )


def _loss(err: np.ndarray, kind: str) -> np.ndarray:
    return err ** 2 if kind == "squared" else np.abs(err)


class _WindowFitter:
    """Per-pipeline state across origins: cached lambda + refresh count."""

    def __init__(self, pipeline: PipelineSpec, cfg: SchemeConfig, seed: int):
        self.pipeline = pipeline
        self.cfg = cfg
        self.seed = seed
        self.cached_lam: float | None = None
        self.origins_seen = 0

    def fit_and_forecast(self, X, y, x_next) -> tuple[float, float]:
        """Fit on (X, y), forecast at x_next; returns (yhat, lambda)."""
        pen = self.pipeline.penalty
        if pen is None:
            ols = fit_ols(X, y)
            return float(ols.intercept + x_next @ ols.coef), np.nan

        sd = standardize(X)
        if sd.kept.size == 0:
            # nothing varies in this window; fall back to the mean
            return float(np.mean(y)), np.nan
        Xs = sd.X
        weights = _resolve_weights(Xs, y, pen, None)
        lam = pen.lam
        if lam is None:
            if self.cached_lam is None or self.origins_seen % self.cfg.cv_refresh == 0:
                grid = lambda_grid(
                    Xs, y, n_grid=self.cfg.n_grid, weights=weights, eta=pen.effective_eta
                )
                cv = cross_validate(
                    Xs, y, pen, n_folds=self.cfg.cv_folds, grid=grid, seed=self.seed
                )
                self.cached_lam = cv.lam
            lam = self.cached_lam
        self.origins_seen += 1
        fit = fit_penalized(
            Xs, y, replace(pen, lam=lam), weights=weights
        )
        b0, coef_s = fit.intercept, fit.coef
        intercept, coef_kept = destandardize(b0, coef_s, sd.center, sd.scale)
        coef = sd.expand(coef_kept, X.shape[1])
        return float(intercept + x_next @ coef), float(lam)


def run_scheme(
    panel: RealizedPanel,
    firm: str,
    bench: PipelineSpec,
    challenger: PipelineSpec,
    cfg: SchemeConfig,
    seed: int = 0,
) -> ForecastRun:
    """Walk the scheme once for one firm and return the aligned run.

    cfg.horizon overrides the horizons inside the model specs so both
    designs are built for the same target.
    """
    d1 = build_design(panel, firm, replace(bench.model, horizon=cfg.horizon))
    d2 = build_design(panel, firm, replace(challenger.model, horizon=cfg.horizon))
    assert np.array_equal(d1.rows, d2.rows), "designs must share usable rows"
    n_rows = d1.n_rows
    P, h = cfg.window, cfg.horizon
    if P >= n_rows - h:
        raise InsufficientWindow(
            f"window {P} needs P < T - h with T = {n_rows} usable rows, horizon {h}"
        )

    fitters = (_WindowFitter(bench, cfg, seed), _WindowFitter(challenger, cfg, seed))
    designs = (d1, d2)
    origins = range(P + h - 1, n_rows)
    n = len(origins)
    f = np.empty((2, n))
    lams = np.full((2, n), np.nan)
    actual = np.empty(n)
    dates = []
    for k, s in enumerate(origins):
        lo = s - h - P + 1 if cfg.scheme == "rolling" else 0
        hi = s - h + 1  # slice end; training targets are all observable at s
        for m in (0, 1):
            dm = designs[m]
            yhat, lam = fitters[m].fit_and_forecast(dm.X[lo:hi], dm.y[lo:hi], dm.X[s])
            if cfg.floor_zero:
                yhat = max(yhat, 0.0)
            f[m, k] = yhat
            lams[m, k] = lam
        actual[k] = d1.y[s]
        # the row-s target completes h days after the predictor date
        dates.append(panel.days[d1.rows[s] + h])

    e1, e2 = actual - f[0], actual - f[1]
    L1, L2 = _loss(e1, cfg.loss), _loss(e2, cfg.loss)
    return ForecastRun(
        firm=firm, dates=dates, actual=actual,
        f1=f[0], f2=f[1], e1=e1, e2=e2, L1=L1, L2=L2, d=L1 - L2,
        label1=bench.label, label2=challenger.label,
        scheme=cfg.scheme, window=P, horizon=h, loss=cfg.loss,
        lam1=lams[0], lam2=lams[1],
    )


def run_firms(
    panel: RealizedPanel,
    firms: list[str],
    bench: PipelineSpec,
    challenger: PipelineSpec,
    cfg: SchemeConfig,
    seed: int = 0,
    threads: int = 1,
) -> dict[str, ForecastRun]:
    """Run every firm, optionally on a bounded worker pool.

    Firms are independent and each firm's walk is sequential, so results
    are identical for any thread count; the returned dict preserves the
    requested firm order.
    """
    if threads < 1:
        raise InvalidConfig(f"threads must be >= 1, got {threads}")
    work = lambda f: run_scheme(panel, f, bench, challenger, cfg, seed)  # noqa: E731
    if threads == 1 or len(firms) == 1:
        runs = [work(f) for f in firms]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(work, firms))
    return {f: r for f, r in zip(firms, runs)}


def mspe(errors) -> float:
    """Mean squared error of a forecast-error sequence."""
    e = np.asarray(errors, dtype=float)
    if e.size == 0:
        raise EmptySequence("mspe of an empty sequence is undefined")
    if not np.all(np.isfinite(e)):
        raise NonFiniteValue("errors contain NaN or infinity")
    return float(np.mean(e ** 2))


RUN_COLUMNS = ["date", "actual", "f1", "f2", "e1", "e2", "L1", "L2", "d"]


def write_forecast_run(run: ForecastRun, path) -> None:
    run.to_frame().to_csv(path, index=False)


def read_forecast_run(path, firm: str = "", **meta) -> ForecastRun:
    """Read a run CSV written by write_forecast_run; metadata fields the
    CSV does not carry (labels, scheme, window) come from `meta`."""
    df = read_csv_checked(path)
    for col in RUN_COLUMNS:
        if col not in df.columns:
            raise MissingColumn(f"forecast-run CSV is missing column {col!r}")
    arr = {c: df[c].to_numpy(dtype=float) for c in RUN_COLUMNS[1:]}
    if not all(np.all(np.isfinite(a)) for a in arr.values()):
        raise NonFiniteValue("forecast-run CSV contains NaN or infinity")
    return ForecastRun(
        firm=firm or meta.get("firm", ""),
        dates=df["date"].astype(str).tolist(),
        actual=arr["actual"], f1=arr["f1"], f2=arr["f2"],
        e1=arr["e1"], e2=arr["e2"], L1=arr["L1"], L2=arr["L2"], d=arr["d"],
        label1=meta.get("label1", "bench"), label2=meta.get("label2", "model"),
        scheme=meta.get("scheme", "rolling"), window=int(meta.get("window", 0)),
        horizon=int(meta.get("horizon", 1)), loss=meta.get("loss", "squared"),
    )
