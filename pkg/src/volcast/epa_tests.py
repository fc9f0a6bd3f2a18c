"""Equal-predictive-ability tests on forecast loss sequences.

Conventions: loss differentials are d_t = L1_t - L2_t with model 1 the
benchmark, so positive d means the challenger (model 2) wins. Long-run
variances use the Bartlett kernel with bandwidth h-1 by default and the
biased (divide by n) autocovariance estimator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import (
    DegenerateSeries,
    ExpandingSchemeRejected,
    InvalidConfig,
    NonFiniteValue,
    SingularDesign,
    SingularOmega,
    TooFewObservations,
)

VARIANCE_FLOOR = 1e-12
COND_LIMIT = 1e12


@dataclass
class EpaResult:
    name: str                 # "dm" | "cw" | "gw"
    statistic: float
    p_value: float
    sided: str                # "two-sided" | "greater" | "chi2"
    n: int
    bandwidth: int | None = None
    q: int | None = None
    extras: dict = field(default_factory=dict)


def _clean_series(x, min_len: int = 1) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidConfig(f"expected a 1-d series, got shape {x.shape}")
    if x.size < min_len:
        raise TooFewObservations(f"need at least {min_len} observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue("series contains NaN or infinity")
    return x


def hac_lrv(x, bandwidth: int) -> float:
    """Bartlett long-run variance gamma_0 + 2*sum (1 - l/(B+1)) gamma_l.

    Autocovariances divide by n (not n-l); bandwidth 0 reduces to the
    biased sample variance. An all-equal series has no long-run variance
    to estimate and raises DegenerateSeries; otherwise the result is
    floored at 1e-12.
    """
    x = _clean_series(x, 1)
    n = x.size
    if not (0 <= bandwidth < n):
        raise InvalidConfig(f"need 0 <= bandwidth < n, got B={bandwidth}, n={n}")
    xd = x - x.mean()
    if np.ptp(x) == 0:
        raise DegenerateSeries("all observations are equal")
    lrv = float(xd @ xd) / n
    for lag in range(1, bandwidth + 1):
        gamma = float(xd[lag:] @ xd[:-lag]) / n
        lrv += 2.0 * (1.0 - lag / (bandwidth + 1.0)) * gamma
    return max(lrv, VARIANCE_FLOOR)


def dm_test(loss1, loss2, h: int = 1, bandwidth: int | None = None) -> EpaResult:
    """Diebold-Mariano test of equal expected loss.

    Parameters
    ----------
    loss1, loss2 : array-like
        Per-period losses of the benchmark (1) and challenger (2).
    h : int
        Forecast horizon; the Bartlett bandwidth defaults to h - 1.
    bandwidth : int, optional
        Explicit bandwidth override.

    Returns
    -------
    EpaResult
        sqrt(n) * mean(d) / sqrt(lrv(d)) against a two-sided standard
        normal, d = loss1 - loss2. Positive statistics favor the
        challenger.
    """
    l1 = _clean_series(loss1, 10)
    l2 = _clean_series(loss2, 10)
    if l1.size != l2.size:
        raise InvalidConfig("loss series must have equal length")
    if h < 1:
        raise InvalidConfig(f"horizon must be >= 1, got {h}")
    d = l1 - l2
    if np.ptp(d) == 0 and d[0] == 0.0:
        raise DegenerateSeries("loss differential is identically zero")
    B = h - 1 if bandwidth is None else bandwidth
    lrv = hac_lrv(d, B)
    stat = float(np.sqrt(d.size) * d.mean() / np.sqrt(lrv))
    p = float(2.0 * stats.norm.sf(abs(stat)))
    return EpaResult(
        name="dm", statistic=stat, p_value=p, sided="two-sided",
        n=d.size, bandwidth=B,
    )


def cw_test(e1, e2, f1, f2, h: int = 1, bandwidth: int | None = None) -> EpaResult:
    """Clark-West MSPE-adjusted test for nested models.

    Model 2 must nest model 1 (the caller asserts this). The adjusted
    differential adj_t = e1^2 - (e2^2 - (f1 - f2)^2) removes the noise
    the larger model adds by estimating coefficients that are zero under
    the null, and the statistic sqrt(n) * mean(adj) / sqrt(lrv(adj)) is
    compared with an upper one-sided standard normal.

    Parameters
    ----------
    e1, e2 : array-like
        Forecast errors (actual - forecast) of benchmark and challenger.
    f1, f2 : array-like
        The forecasts themselves.
    h : int
        Forecast horizon; Bartlett bandwidth defaults to h - 1.
    bandwidth : int, optional
        Explicit bandwidth override.
    """
    e1 = _clean_series(e1, 10)
    e2 = _clean_series(e2, 10)
    f1 = _clean_series(f1, 10)
    f2 = _clean_series(f2, 10)
    if not (e1.size == e2.size == f1.size == f2.size):
        raise InvalidConfig("error and forecast series must share one length")
    if h < 1:
        raise InvalidConfig(f"horizon must be >= 1, got {h}")
    adj = e1 ** 2 - (e2 ** 2 - (f1 - f2) ** 2)
    if np.ptp(adj) == 0 and adj[0] == 0.0:
        raise DegenerateSeries("adjusted differential is identically zero")
    B = h - 1 if bandwidth is None else bandwidth
    lrv = hac_lrv(adj, B)
    stat = float(np.sqrt(adj.size) * adj.mean() / np.sqrt(lrv))
    p = float(stats.norm.sf(stat))
    return EpaResult(
        name="cw", statistic=stat, p_value=p, sided="greater",
        n=adj.size, bandwidth=B, extras={"mean_adjusted": float(adj.mean())},
    )


def _gw_instruments(d: np.ndarray, instruments: str, tau: int):
    """Stack Z_t = h_t * d_{t+tau}; constant instruments need no lag."""
    if instruments == "constant":
        return d[:, None]
    if instruments == "lagged":
        lead = d[tau:]
        return np.column_stack([lead, d[:-tau] * lead])
    raise InvalidConfig(f"unknown instruments {instruments!r}")


def gw_test(
    loss_diff,
    scheme: str = "rolling",
    instruments: str = "constant",
    tau: int = 1,
) -> EpaResult:
    """Giacomini-White conditional predictive-ability Wald test.

    The asymptotics require a fixed-size estimation window, so an
    expanding scheme is refused. With constant instruments (q = 1) the
    statistic is n * mean(d)^2 / mean(d^2); adding the lagged loss
    differential (q = 2) tests conditional equal ability. p-values come
    from the upper tail of chi-square(q).
    """
    if scheme == "expanding":
        raise ExpandingSchemeRejected("conditional EPA tests need a rolling scheme")
    if scheme != "rolling":
        raise InvalidConfig(f"unknown scheme {scheme!r}")
    if tau < 1:
        raise InvalidConfig(f"tau must be >= 1, got {tau}")
    d = _clean_series(loss_diff, 2)
    Z = _gw_instruments(d, instruments, tau)
    nn, q = Z.shape
    if nn <= q:
        raise TooFewObservations(f"need more than q={q} usable observations, got {nn}")
    zbar = Z.mean(axis=0)
    omega = Z.T @ Z / nn
    cond = np.linalg.cond(omega)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularOmega("instrument second-moment matrix is singular")
    stat = float(nn * zbar @ np.linalg.solve(omega, zbar))
    p = float(stats.chi2.sf(stat, df=q))
    return EpaResult(
        name="gw", statistic=stat, p_value=p, sided="chi2", n=nn, q=q,
    )


@dataclass
class DecisionResult:
    choice: str              # "benchmark" | "challenger"
    predicted: float         # delta'h_T, the predicted next loss differential
    delta: np.ndarray        # regression coefficients
    threshold: float


def gw_decision_rule(
    loss_diff,
    instruments: str = "constant",
    c: float = 0.0,
    tau: int = 1,
) -> DecisionResult:
    """Pick a model for the next period from the conditional rule.

    Regress d_{t+tau} on the instruments h_t by OLS, predict the next
    differential at the final observed h_T, and choose the challenger
    only when the prediction strictly exceeds c (ties keep the
    benchmark).
    """
    d = _clean_series(loss_diff, 2)
    if tau < 1:
        raise InvalidConfig(f"tau must be >= 1, got {tau}")
    if instruments == "constant":
        H = np.ones((d.size, 1))
        target = d
        h_last = np.ones(1)
    elif instruments == "lagged":
        if d.size <= tau + 1:
            raise TooFewObservations("need at least tau + 2 observations")
        H = np.column_stack([np.ones(d.size - tau), d[:-tau]])
        target = d[tau:]
        h_last = np.array([1.0, d[-1]])
    else:
        raise InvalidConfig(f"unknown instruments {instruments!r}")
    G = H.T @ H
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularDesign("instrument regression is singular")
    delta = np.linalg.solve(G, H.T @ target)
    predicted = float(h_last @ delta)
    choice = "challenger" if predicted > c else "benchmark"
    return DecisionResult(choice=choice, predicted=predicted, delta=delta, threshold=c)
