"""Daily realized measures from intraday returns.

For a day with M intraday returns r_1..r_M:

    RV  = sum r_i^2
    BPV = mu1^-2 * sum_{i=1}^{M-1} |r_i| |r_{i+1}|,   mu1 = sqrt(2/pi) = E|Z|
    RQ  = (M/3) * sum r_i^4
    J   = max(RV - BPV, 0)

RV converges to integrated variance plus the squared-jump sum, BPV to
integrated variance alone (the mu1^-2 factor undoes the E|Z||Z'| bias of
the adjacent absolute-return product), so J isolates the jump part.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    EmptyDay,
    InvalidConfig,
    NonFiniteValue,
    TooFewIntraday,
    WindowExceedsSeries,
)

MU1 = float(np.sqrt(2.0 / np.pi))


def _as_clean_vector(returns, min_len: int, err_cls) -> np.ndarray:
    r = np.asarray(returns, dtype=float)
    if r.ndim != 1:
        raise NonFiniteValue(f"expected a 1-d return vector, got shape {r.shape}")
    if r.size < min_len:
        raise err_cls(f"need at least {min_len} intraday returns, got {r.size}")
    if not np.all(np.isfinite(r)):
        raise NonFiniteValue("intraday returns contain NaN or infinity")
    return r


def compute_rv(returns) -> float:
    """Realized variance: the sum of squared intraday returns.

    Parameters
    ----------
    returns : array-like
        Intraday returns for one firm-day, in time order. Must be finite
        and non-empty.

    Returns
    -------
    float
        Always >= 0.
    """
    r = _as_clean_vector(returns, 1, EmptyDay)
    return float(np.dot(r, r))


def compute_bpv(returns) -> float:
    """Bipower variation, scaled to estimate integrated variance.

    Sums products of adjacent absolute returns and multiplies by mu1^-2
    (mu1 = sqrt(2/pi)), which removes the expectation bias of |r_i||r_{i+1}|
    under Brownian increments. Jumps enter at most one adjacent product
    each, so BPV stays consistent for integrated variance when jumps are
    present.

    Parameters
    ----------
    returns : array-like
        Intraday returns for one firm-day, in time order. Needs M >= 2.

    Returns
    -------
    float
        Always >= 0.
    """
    r = _as_clean_vector(returns, 2, TooFewIntraday)
    a = np.abs(r)
    return float(np.dot(a[:-1], a[1:]) / (MU1 * MU1))


def compute_rq(returns) -> float:
    """Realized quarticity (M/3) * sum r^4, an estimate of integrated quarticity."""
    r = _as_clean_vector(returns, 1, EmptyDay)
    return float(r.size / 3.0 * np.sum(r ** 4))


def compute_jump(rv: float, bpv: float) -> float:
    """Non-negative jump component max(rv - bpv, 0)."""
    if not (np.isfinite(rv) and np.isfinite(bpv)):
        raise NonFiniteValue("rv and bpv must be finite")
    return max(float(rv) - float(bpv), 0.0)


def temporal_average(series, window: int, mode: str = "trailing") -> np.ndarray:
    """Equal-weight moving average with explicit missing markers.

    mode="trailing" averages the current value and the window-1 preceding
    ones (the weekly/monthly volatility filters); mode="forward" averages
    the next `window` values after the current position (the forward
    forecast target), so window=1 is the series shifted back by one.
    Positions without full support are NaN, never zero-padded.

    Parameters
    ----------
    series : array-like
        1-d series; NaNs are allowed and propagate.
    window : int
        Positive window length, at most len(series).
    mode : str
        "trailing" or "forward".

    Returns
    -------
    np.ndarray
        Same length as the input, NaN where the window lacks support.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise NonFiniteValue(f"expected a 1-d series, got shape {x.shape}")
    n = x.size
    if window < 1:
        raise WindowExceedsSeries(f"window must be >= 1, got {window}")
    if window > n:
        raise WindowExceedsSeries(f"window {window} exceeds series length {n}")
    out = np.full(n, np.nan)
    # windowed means via sliding views so an interior NaN only poisons the
    # windows that actually contain it
    means = np.lib.stride_tricks.sliding_window_view(x, window).mean(axis=1)
    if mode == "trailing":
        out[window - 1:] = means
    elif mode == "forward":
        # mean of x[t+1 .. t+window] sits at position t
        out[: n - window] = means[1:]
    else:
        raise InvalidConfig(f"unknown temporal_average mode {mode!r}")
    return out
