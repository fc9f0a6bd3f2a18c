"""Design matrices for the HAR model family.

Every variant regresses the forward h-step average of a target firm's rv
on lagged volatility components known at the forecast origin:

    har     rv_d, rv_w, rv_m                    (daily, weekly, monthly)
    harq    har + sqrt(rq_d) * rv_d             (daily attenuation term)
    harq_f  har + sqrt(rq) * rv on all three lags
    har_j   har + jump_d
    char    bpv_d, bpv_w, bpv_m                 (continuous components)

Scope "benchmark" uses the target firm's own components; "cross_section"
stacks the same block for every firm in the panel, in firm order. Rows
are trimmed to predictor times where the monthly aggregate exists and the
forward target is observable, so a panel with D days and horizon h yields
D - 22 - h + 1 usable rows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyRangeAfterTrim,
    InvalidConfig,
    MeasureUnavailable,
    TooFewRows,
    ZeroVarianceColumn,
)
from .panel_data import MONTH_WINDOW, WEEK_WINDOW, RealizedPanel, _aggregate
from .realized_measures import temporal_average

VARIANTS = ("har", "harq", "harq_f", "har_j", "char")
SCOPES = ("benchmark", "cross_section")


@dataclass(frozen=True)
class ModelSpec:
    """What to put in the design matrix."""

    variant: str = "har"
    scope: str = "benchmark"
    horizon: int = 1

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise InvalidConfig(f"unknown variant {self.variant!r}")
        if self.scope not in SCOPES:
            raise InvalidConfig(f"unknown scope {self.scope!r}")
        if self.horizon < 1:
            raise InvalidConfig(f"horizon must be >= 1, got {self.horizon}")

    @property
    def cols_per_firm(self) -> int:
        return {"har": 3, "harq": 4, "harq_f": 6, "har_j": 4, "char": 3}[self.variant]


@dataclass
class DesignMatrix:
    X: np.ndarray          # (n_rows, n_cols), predictor values at time t
    y: np.ndarray          # forward h-average of the target firm's rv
    columns: list[str]
    rows: np.ndarray       # day indices of the predictor times t
    dates: list[str]       # panel dates at those times
    firm: str
    spec: ModelSpec

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]


def _firm_block(panel: RealizedPanel, j: int, f: str, variant: str):
    """Predictor columns contributed by firm f, as (names, columns)."""
    rv_d = panel.rv[:, j]
    rv_w = panel.rv_w[:, j]
    rv_m = panel.rv_m[:, j]
    if variant == "char":
        if panel.bpv is None:
            raise MeasureUnavailable("char needs bpv, which this panel lacks")
        b = panel.bpv[:, j]
        return (
            [f"BPV_d[{f}]", f"BPV_w[{f}]", f"BPV_m[{f}]"],
            [b, _aggregate(b, WEEK_WINDOW), _aggregate(b, MONTH_WINDOW)],
        )
    names = [f"RV_d[{f}]", f"RV_w[{f}]", f"RV_m[{f}]"]
    cols = [rv_d, rv_w, rv_m]
    if variant in ("harq", "harq_f"):
        if panel.rq is None:
            raise MeasureUnavailable(f"{variant} needs rq, which this panel lacks")
        rq_d = panel.rq[:, j]
        names.append(f"RV_d×√RQ[{f}]")
        cols.append(np.sqrt(rq_d) * rv_d)
        if variant == "harq_f":
            rq_w = _aggregate(rq_d, WEEK_WINDOW)
            rq_m = _aggregate(rq_d, MONTH_WINDOW)
            names += [f"RV_w×√RQ[{f}]", f"RV_m×√RQ[{f}]"]
            cols += [np.sqrt(rq_w) * rv_w, np.sqrt(rq_m) * rv_m]
    elif variant == "har_j":
        if panel.jump is None:
            raise MeasureUnavailable("har_j needs the jump measure, which this panel lacks")
        names.append(f"J_d[{f}]")
        cols.append(panel.jump[:, j])
    return names, cols


def build_design(
    panel: RealizedPanel,
    firm: str,
    spec: ModelSpec,
    day_range: tuple[str | None, str | None] | None = None,
) -> DesignMatrix:
    """Assemble the (X, y) pair for one target firm.

    day_range optionally restricts the predictor dates to a closed
    [start, end] interval (ISO strings, either side may be None).
    """
    i = panel.firm_index(firm)
    h = spec.horizon
    n = panel.n_days
    if n < MONTH_WINDOW + h:
        raise EmptyRangeAfterTrim(
            f"panel has {n} days, need at least {MONTH_WINDOW + h} for horizon {h}"
        )
    y_full = temporal_average(panel.rv[:, i], h, "forward")

    in_scope = panel.firms if spec.scope == "cross_section" else [firm]
    names: list[str] = []
    cols: list[np.ndarray] = []
    for f in in_scope:
        nm, cl = _firm_block(panel, panel.firm_index(f), f, spec.variant)
        names += nm
        cols += cl
    X_full = np.column_stack(cols)

    # predictor times where every component and the target are observable
    t0, t1 = MONTH_WINDOW - 1, n - 1 - h
    rows = np.arange(t0, t1 + 1)
    if day_range is not None:
        lo, hi = day_range
        dates_arr = np.asarray(panel.days, dtype=object)[rows]
        keep = np.ones(rows.size, dtype=bool)
        if lo is not None:
            keep &= dates_arr >= lo
        if hi is not None:
            keep &= dates_arr <= hi
        rows = rows[keep]
    if rows.size == 0:
        raise EmptyRangeAfterTrim("no usable rows left after trimming")

    X = X_full[rows]
    y = y_full[rows]
    assert np.all(np.isfinite(X)) and np.all(np.isfinite(y))
    return DesignMatrix(
        X=X, y=y, columns=names, rows=rows,
        dates=[panel.days[t] for t in rows], firm=firm, spec=spec,
    )


@dataclass
class StandardizedDesign:
    X: np.ndarray            # kept columns, centered and scaled
    center: np.ndarray       # means of the kept columns
    scale: np.ndarray        # ddof=1 standard deviations of the kept columns
    kept: np.ndarray         # indices of kept columns in the original matrix
    dropped: list[str]       # names of dropped constant columns

    def expand(self, coef: np.ndarray, n_cols: int) -> np.ndarray:
        """Scatter kept-column coefficients back to original width."""
        full = np.zeros(n_cols)
        full[self.kept] = coef
        return full


def standardize(X: np.ndarray, columns: list[str] | None = None) -> StandardizedDesign:
    """Center each column and scale to unit sample standard deviation.

    Constant columns carry no information once centered; they are dropped
    with a ZeroVarianceColumn warning rather than producing a 0/0.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InvalidConfig(f"expected a 2-d matrix, got shape {X.shape}")
    if X.shape[0] < 2:
        raise TooFewRows("standardize needs at least 2 rows")
    names = columns if columns is not None else [f"x{j}" for j in range(X.shape[1])]
    constant = np.array([np.ptp(X[:, j]) == 0 for j in range(X.shape[1])])
    if constant.any():
        dropped = [names[j] for j in np.flatnonzero(constant)]
        warnings.warn(
            f"dropping constant columns: {dropped}", ZeroVarianceColumn, stacklevel=2
        )
    else:
        dropped = []
    kept = np.flatnonzero(~constant)
    Xk = X[:, kept]
    center = Xk.mean(axis=0)
    scale = Xk.std(axis=0, ddof=1)
    return StandardizedDesign(
        X=(Xk - center) / scale, center=center, scale=scale, kept=kept, dropped=dropped
    )


def destandardize(
    intercept_s: float, coef_s: np.ndarray, center: np.ndarray, scale: np.ndarray
) -> tuple[float, np.ndarray]:
    """Map (intercept, coefficients) fitted on standardized columns back
    to the original units."""
    coef = np.asarray(coef_s, dtype=float) / scale
    intercept = float(intercept_s) - float(np.dot(coef, center))
    return intercept, coef
