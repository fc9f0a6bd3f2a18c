"""Panel containers and CSV ingestion.

Two containers: IntradayPanel holds per-firm, per-day intraday return
vectors; RealizedPanel holds the daily measure series (rv always, bpv /
rq / jump when available) plus the trailing weekly and monthly rv
aggregates. Days are ISO dates, strictly increasing and shared by every
firm; firms are kept in lexicographic order. Aggregate positions without
full window support are NaN markers, never zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date as _date

import numpy as np
import pandas as pd

from .errors import (
    MissingColumn,
    NegativeRV,
    NonAlignedCalendar,
    NonFiniteValue,
    TooFewIntraday,
    TooFewObservations,
)
from .realized_measures import (
    compute_bpv,
    compute_jump,
    compute_rq,
    compute_rv,
    temporal_average,
)

WEEK_WINDOW = 5
MONTH_WINDOW = 22


def read_csv_checked(path) -> pd.DataFrame:
    """pd.read_csv with file-level failures mapped to DataError."""
    from .errors import DataError

    try:
        # round_trip parsing keeps write/load cycles bit-exact
        return pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError as exc:
        raise DataError(f"no such file: {path}") from exc
    except (pd.errors.EmptyDataError, pd.errors.ParserError, IsADirectoryError) as exc:
        raise DataError(f"cannot parse CSV {path}: {exc}") from exc


def _check_iso_dates(days) -> list[str]:
    out = []
    for d in days:
        s = str(d)
        try:
            _date.fromisoformat(s)
        except ValueError as exc:
            raise NonAlignedCalendar(f"bad ISO date {s!r}") from exc
        out.append(s)
    if any(a >= b for a, b in zip(out, out[1:])):
        raise NonAlignedCalendar("calendar must be strictly increasing")
    return out


@dataclass
class IntradayPanel:
    """Intraday returns, one vector per (firm, day)."""

    firms: list[str]
    days: list[str]
    returns: dict[str, list[np.ndarray]]  # firm -> one vector per day

    @property
    def n_firms(self) -> int:
        return len(self.firms)

    @property
    def n_days(self) -> int:
        return len(self.days)


def _aggregate(series: np.ndarray, window: int) -> np.ndarray:
    # short panels simply have no supported positions
    if series.size < window:
        return np.full(series.size, np.nan)
    return temporal_average(series, window, "trailing")


@dataclass
class RealizedPanel:
    """Daily realized-measure panel, arrays shaped (n_days, n_firms)."""

    firms: list[str]
    days: list[str]
    rv: np.ndarray
    rv_w: np.ndarray = field(init=False)
    rv_m: np.ndarray = field(init=False)
    bpv: np.ndarray | None = None
    rq: np.ndarray | None = None
    jump: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.days = _check_iso_dates(self.days)
        self.rv = np.asarray(self.rv, dtype=float)
        if self.rv.shape != (len(self.days), len(self.firms)):
            raise NonFiniteValue(
                f"rv shape {self.rv.shape} does not match "
                f"({len(self.days)}, {len(self.firms)})"
            )
        if not np.all(np.isfinite(self.rv)):
            raise NonFiniteValue("rv contains NaN or infinity")
        if np.any(self.rv < 0):
            raise NegativeRV("rv contains negative entries")
        for name in ("bpv", "rq", "jump"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.asarray(arr, dtype=float)
            if arr.shape != self.rv.shape:
                raise NonFiniteValue(f"{name} shape mismatch")
            if not np.all(np.isfinite(arr)):
                raise NonFiniteValue(f"{name} contains NaN or infinity")
            setattr(self, name, arr)
        self.rv_w = np.column_stack(
            [_aggregate(self.rv[:, j], WEEK_WINDOW) for j in range(self.n_firms)]
        )
        self.rv_m = np.column_stack(
            [_aggregate(self.rv[:, j], MONTH_WINDOW) for j in range(self.n_firms)]
        )

    @property
    def n_firms(self) -> int:
        return len(self.firms)

    @property
    def n_days(self) -> int:
        return len(self.days)

    def firm_index(self, firm: str) -> int:
        try:
            return self.firms.index(firm)
        except ValueError as exc:
            raise MissingColumn(f"unknown firm {firm!r}") from exc


def load_intraday(path) -> IntradayPanel:
    """Read a long intraday CSV with header date,firm,seq,return.

    Every firm must cover the same strictly increasing calendar and every
    firm-day needs at least two returns. `seq` orders returns within the
    day.
    """
    df = read_csv_checked(path)
    for col in ("date", "firm", "seq", "return"):
        if col not in df.columns:
            raise MissingColumn(f"intraday CSV is missing column {col!r}")
    vals = df["return"].to_numpy(dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteValue("intraday returns contain NaN or infinity")

    df = df.sort_values(["firm", "date", "seq"], kind="mergesort")
    firms = sorted(df["firm"].astype(str).unique())
    day_sets = {f: g["date"].astype(str).unique() for f, g in df.groupby("firm")}
    days = _check_iso_dates(sorted(day_sets[firms[0]]))
    for f in firms[1:]:
        if sorted(day_sets[str(f)]) != days:
            raise NonAlignedCalendar(f"firm {f!r} does not share the common calendar")

    returns: dict[str, list[np.ndarray]] = {}
    for f in firms:
        sub = df[df["firm"].astype(str) == f]
        per_day = {str(d): g["return"].to_numpy(dtype=float) for d, g in sub.groupby("date")}
        vectors = []
        for d in days:
            r = per_day[d]
            if r.size < 2:
                raise TooFewIntraday(f"firm {f!r} day {d} has {r.size} returns, need >= 2")
            vectors.append(r)
        returns[f] = vectors
    return IntradayPanel(firms=firms, days=days, returns=returns)


def write_intraday(panel: IntradayPanel, path) -> None:
    """Write the long intraday CSV (date,firm,seq,return)."""
    rows = {"date": [], "firm": [], "seq": [], "return": []}
    for f in panel.firms:
        for d, r in zip(panel.days, panel.returns[f]):
            rows["date"].extend([d] * len(r))
            rows["firm"].extend([f] * len(r))
            rows["seq"].extend(range(len(r)))
            rows["return"].extend(float(v) for v in r)
    pd.DataFrame(rows).to_csv(path, index=False)


def build_realized_panel(intraday: IntradayPanel) -> RealizedPanel:
    """Compute rv/bpv/rq/jump for every firm-day of an intraday panel."""
    n_d, n_f = intraday.n_days, intraday.n_firms
    rv = np.empty((n_d, n_f))
    bpv = np.empty((n_d, n_f))
    rq = np.empty((n_d, n_f))
    jump = np.empty((n_d, n_f))
    for j, f in enumerate(intraday.firms):
        for t, r in enumerate(intraday.returns[f]):
            rv[t, j] = compute_rv(r)
            bpv[t, j] = compute_bpv(r)
            rq[t, j] = compute_rq(r)
            jump[t, j] = compute_jump(rv[t, j], bpv[t, j])
    return RealizedPanel(
        firms=list(intraday.firms), days=list(intraday.days),
        rv=rv, bpv=bpv, rq=rq, jump=jump,
    )


def load_daily_rv(path) -> RealizedPanel:
    """Read a wide daily CSV (date, one rv column per firm).

    bpv/rq/jump are unavailable in this format; models that need them
    will refuse the panel.
    """
    df = read_csv_checked(path)
    if "date" not in df.columns:
        raise MissingColumn("daily CSV is missing column 'date'")
    firm_cols = [c for c in df.columns if c != "date"]
    if not firm_cols:
        raise MissingColumn("daily CSV has no firm columns")
    df = df.sort_values("date", kind="mergesort")
    days = _check_iso_dates(df["date"].astype(str).tolist())
    firms = sorted(str(c) for c in firm_cols)
    rv = df[firms].to_numpy(dtype=float)
    if not np.all(np.isfinite(rv)):
        raise NonFiniteValue("daily rv contains NaN or infinity")
    if np.any(rv < 0):
        raise NegativeRV("daily rv contains negative entries")
    return RealizedPanel(firms=firms, days=days, rv=rv)


def write_daily_rv(panel: RealizedPanel, path) -> None:
    """Write the rv block as a wide daily CSV; floats use shortest
    round-trip formatting so a load/write cycle is bit-exact."""
    df = pd.DataFrame({"date": panel.days})
    for j, f in enumerate(panel.firms):
        df[f] = panel.rv[:, j]
    df.to_csv(path, index=False)


_MEASURES = ("rv", "bpv", "rq", "jump")


def write_measures_panel(panel: RealizedPanel, path) -> None:
    """Write all available measures as a wide CSV with rv[F], bpv[F], ...
    columns grouped per firm."""
    df = pd.DataFrame({"date": panel.days})
    for j, f in enumerate(panel.firms):
        for m in _MEASURES:
            arr = getattr(panel, m)
            if arr is not None:
                df[f"{m}[{f}]"] = arr[:, j]
    df.to_csv(path, index=False)


def load_measures_panel(path) -> RealizedPanel:
    """Read a measures CSV produced by write_measures_panel.

    Also accepts the plain wide rv format (date, one column per firm).
    """
    df = read_csv_checked(path)
    if "date" not in df.columns:
        raise MissingColumn("measures CSV is missing column 'date'")
    bracketed = [c for c in df.columns if "[" in c and c.endswith("]")]
    if not bracketed:
        return load_daily_rv(path)
    df = df.sort_values("date", kind="mergesort")
    days = _check_iso_dates(df["date"].astype(str).tolist())
    firms = sorted({c.split("[", 1)[1][:-1] for c in bracketed})
    blocks: dict[str, np.ndarray | None] = {}
    for m in _MEASURES:
        cols = [f"{m}[{f}]" for f in firms]
        if all(c in df.columns for c in cols):
            arr = df[cols].to_numpy(dtype=float)
            if not np.all(np.isfinite(arr)):
                raise NonFiniteValue(f"{m} contains NaN or infinity")
            blocks[m] = arr
        elif any(c in df.columns for c in cols):
            raise MissingColumn(f"measure {m!r} present for only some firms")
        else:
            blocks[m] = None
    if blocks["rv"] is None:
        raise MissingColumn("measures CSV has no rv columns")
    if np.any(blocks["rv"] < 0):
        raise NegativeRV("rv contains negative entries")
    return RealizedPanel(
        firms=firms, days=days, rv=blocks["rv"],
        bpv=blocks["bpv"], rq=blocks["rq"], jump=blocks["jump"],
    )


def summarize(panel: RealizedPanel) -> pd.DataFrame:
    """Per-firm descriptive table: min, mean, median, max and the AR(1)
    slope of rv (OLS of rv_t on rv_{t-1} with intercept).

    The AR(1) entry is NaN for a constant series. Day order inside the
    panel is irrelevant; rows are re-sorted by date before anything is
    computed.
    """
    if panel.n_days < 2:
        raise TooFewObservations("summarize needs at least 2 days")
    order = np.argsort(np.asarray(panel.days))
    rv = panel.rv[order]
    rows = {}
    for j, f in enumerate(panel.firms):
        x = rv[:, j]
        lag, cur = x[:-1], x[1:]
        vx = np.var(lag)
        ar1 = np.nan if vx == 0 else float(np.cov(lag, cur, bias=True)[0, 1] / vx)
        rows[f] = {
            "min": float(x.min()),
            "mean": float(x.mean()),
            "median": float(np.median(x)),
            "max": float(x.max()),
            "ar1": ar1,
        }
    return pd.DataFrame.from_dict(rows, orient="index")
