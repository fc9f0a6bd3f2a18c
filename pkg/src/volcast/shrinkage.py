"""Penalized linear regression by cyclic coordinate descent.

The working objective, with an unpenalized intercept handled by centering,
is

    Q(b) = (1/2T) * sum_t (y_t - b0 - x_t'b)^2
           + lam * ( eta * sum_j w_j |b_j| + (1 - eta) * sum_j b_j^2 )

with eta = 1 and w_j = 1 for the lasso, eta = 1 and data-driven w_j for
the adaptive lasso, and w_j = 1 with 0 < eta < 1 for the elastic net.
Each coordinate update soft-thresholds at lam*eta*w_j and divides by the
exact curvature a_j + 2*lam*(1-eta), a_j = (1/T)||x_j||^2, so the KKT
conditions hold at the returned point for any column scaling. The cyclic
order is fixed (j = 0..p-1), which makes fits bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import (
    InvalidConfig,
    NonFiniteInput,
    NotConverged,
    SingularDesign,
    TooFewRows,
)

KINDS = ("lasso", "alasso", "enet")
WEIGHT_FLOOR = 1e-6
KKT_TOL = 1e-6
COND_LIMIT = 1e12


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty family and hyperparameters; lam=None defers to CV."""

    kind: str = "lasso"
    lam: float | None = None
    eta: float = 0.5     # elastic-net l1 share; ignored for lasso/alasso
    gamma: float = 1.0   # adaptive-weight exponent

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InvalidConfig(f"unknown penalty kind {self.kind!r}")
        if self.lam is not None and not (np.isfinite(self.lam) and self.lam >= 0):
            raise InvalidConfig(f"lam must be finite and >= 0, got {self.lam}")
        if not (0.0 < self.eta <= 1.0):
            raise InvalidConfig(f"eta must lie in (0, 1], got {self.eta}")
        if self.gamma <= 0:
            raise InvalidConfig(f"gamma must be > 0, got {self.gamma}")

    @property
    def effective_eta(self) -> float:
        return self.eta if self.kind == "enet" else 1.0


@dataclass
class OlsFit:
    intercept: float
    coef: np.ndarray


@dataclass
class PenaltyFit:
    intercept: float
    coef: np.ndarray
    lam: float
    eta: float
    weights: np.ndarray
    kind: str
    n_iter: int
    converged: bool
    objective: float

    @property
    def active(self) -> np.ndarray:
        return np.flatnonzero(self.coef != 0.0)


def soft_threshold(z: float, t: float) -> float:
    """sign(z) * max(|z| - t, 0)."""
    a = abs(z) - t
    return 0.0 if a <= 0.0 else (a if z > 0 else -a)


@njit(cache=True)
def _cd_cycles(X, y, a, thr, ridge, beta, r, tol, max_iter):  # pragma: no cover
    T, p = X.shape
    it = 0
    while it < max_iter:
        it += 1
        dmax = 0.0
        for j in range(p):
            aj = a[j]
            if aj <= 0.0:
                continue
            bj = beta[j]
            s = 0.0
            for t in range(T):
                s += X[t, j] * r[t]
            zj = s / T + aj * bj
            az = abs(zj) - thr[j]
            if az <= 0.0:
                bn = 0.0
            else:
                bn = az / (aj + ridge)
                if zj < 0.0:
                    bn = -bn
            d = bn - bj
            if d != 0.0:
                beta[j] = bn
                for t in range(T):
                    r[t] -= X[t, j] * d
                ad = abs(d)
                if ad > dmax:
                    dmax = ad
        if dmax < tol:
            return it, True
    return max_iter, False


def _validate_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.size:
        raise InvalidConfig(f"incompatible shapes X{X.shape}, y{y.shape}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteInput("X and y must be finite")
    if y.size < 2:
        raise TooFewRows(f"need at least 2 rows, got {y.size}")
    if X.shape[1] < 1:
        raise InvalidConfig("X needs at least one column")
    return X, y


def fit_ols(X, y) -> OlsFit:
    """Least squares with an intercept via centered normal equations.

    Raises SingularDesign when X'X (after centering) is numerically
    singular; the residual is checked for orthogonality to the columns
    before the fit is returned.
    """
    X, y = _validate_xy(X, y)
    xbar = X.mean(axis=0)
    ybar = float(y.mean())
    Xc = X - xbar
    yc = y - ybar
    G = Xc.T @ Xc
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularDesign("X'X is numerically singular")
    coef = np.linalg.solve(G, Xc.T @ yc)
    resid = yc - Xc @ coef
    scale = max(1.0, float(np.abs(Xc.T @ yc).max()))
    if float(np.abs(Xc.T @ resid).max()) > 1e-8 * scale:
        raise SingularDesign("normal equations solved inaccurately")
    return OlsFit(intercept=ybar - float(xbar @ coef), coef=coef)


def _ridge_pilot(Xc, yc, penalty=1e-3) -> np.ndarray:
    T = Xc.shape[0]
    G = Xc.T @ Xc / T + penalty * np.eye(Xc.shape[1])
    return np.linalg.solve(G, Xc.T @ yc / T)


def pilot_weights(X, y, gamma: float = 1.0) -> np.ndarray:
    """Adaptive-lasso weights 1/|pilot_j|^gamma with a 1e-6 floor on the
    pilot magnitudes. The pilot is OLS while p < 0.9 T, else ridge with
    penalty 1e-3."""
    X, y = _validate_xy(X, y)
    T, p = X.shape
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    if p < 0.9 * T:
        try:
            coef = fit_ols(X, y).coef
        except SingularDesign:
            coef = _ridge_pilot(Xc, yc)
    else:
        coef = _ridge_pilot(Xc, yc)
    return adaptive_weights(coef, gamma)


def adaptive_weights(pilot_coef, gamma: float = 1.0, floor: float = WEIGHT_FLOOR) -> np.ndarray:
    """w_j = 1 / max(|pilot_j|, floor)^gamma."""
    b = np.abs(np.asarray(pilot_coef, dtype=float))
    return 1.0 / np.maximum(b, floor) ** gamma


def _resolve_weights(X, y, spec: PenaltySpec, weights) -> np.ndarray:
    p = X.shape[1]
    if spec.kind != "alasso":
        return np.ones(p)
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.shape != (p,) or not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidConfig("adaptive weights must be finite, >= 0, one per column")
        return w
    return pilot_weights(X, y, spec.gamma)


def objective_value(X, y, intercept, coef, lam, eta=1.0, weights=None) -> float:
    """Q at an arbitrary candidate point (see module docstring)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    coef = np.asarray(coef, dtype=float)
    w = np.ones(coef.size) if weights is None else np.asarray(weights, dtype=float)
    r = y - intercept - X @ coef
    fit = float(r @ r) / (2.0 * y.size)
    pen = lam * (eta * float(w @ np.abs(coef)) + (1.0 - eta) * float(coef @ coef))
    return fit + pen


def kkt_violation(X, y, fit: PenaltyFit) -> float:
    """Largest violation of the stationarity conditions at `fit`.

    Active coordinates must satisfy x_j'r/T = lam*eta*w_j*sign(b_j)
    + 2*lam*(1-eta)*b_j exactly; inactive ones must have |x_j'r/T| below
    the threshold. Returns the max excess over both sets.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    r = y - fit.intercept - X @ fit.coef
    g = X.T @ r / y.size
    thr = fit.lam * fit.eta * fit.weights
    worst = 0.0
    for j in range(X.shape[1]):
        if fit.coef[j] != 0.0:
            target = thr[j] * np.sign(fit.coef[j]) + 2.0 * fit.lam * (1.0 - fit.eta) * fit.coef[j]
            worst = max(worst, abs(g[j] - target))
        else:
            worst = max(worst, abs(g[j]) - thr[j])
    return worst


def fit_penalized(
    X,
    y,
    spec: PenaltySpec,
    weights=None,
    beta_init=None,
    tol: float = 1e-8,
    max_iter: int = 100_000,
    check_kkt: bool = True,
) -> PenaltyFit:
    """Solve the penalized regression at spec.lam by coordinate descent.

    The intercept is unpenalized and recovered analytically from column
    means. Convergence requires the largest coefficient update in a full
    cycle to drop below `tol`; NotConverged is raised otherwise, and the
    KKT conditions are verified to 1e-6 before returning.
    """
    X, y = _validate_xy(X, y)
    if spec.lam is None:
        raise InvalidConfig("fit_penalized needs spec.lam; use fit_cv to select it")
    w = _resolve_weights(X, y, spec, weights)
    eta = spec.effective_eta
    lam = float(spec.lam)

    xbar = X.mean(axis=0)
    ybar = float(y.mean())
    Xc = np.asfortranarray(X - xbar)
    yc = y - ybar
    a = np.ascontiguousarray((Xc * Xc).mean(axis=0))
    thr = np.ascontiguousarray(lam * eta * w)
    ridge = 2.0 * lam * (1.0 - eta)

    beta = np.zeros(X.shape[1]) if beta_init is None else np.array(beta_init, dtype=float)
    r = yc - Xc @ beta
    n_iter, converged = _cd_cycles(Xc, yc, a, thr, ridge, beta, r, tol, max_iter)
    if not converged:
        raise NotConverged(f"coordinate descent did not converge in {max_iter} cycles")

    intercept = ybar - float(xbar @ beta)
    fit = PenaltyFit(
        intercept=intercept, coef=beta, lam=lam, eta=eta, weights=w,
        kind=spec.kind, n_iter=n_iter, converged=converged,
        objective=objective_value(X, y, intercept, beta, lam, eta, w),
    )
    if check_kkt:
        v = kkt_violation(X, y, fit)
        if v > KKT_TOL:
            raise NotConverged(f"KKT violation {v:.2e} exceeds {KKT_TOL}")
    return fit


def lambda_grid(X, y, n_grid: int = 100, ratio: float = 1e-4, weights=None, eta: float = 1.0) -> np.ndarray:
    """Descending log-spaced grid from lam_max down to ratio*lam_max.

    lam_max = max_j |x_j'(y - ybar)| / (T * w_j * eta) is the smallest
    lam at which every slope is exactly zero.
    """
    X, y = _validate_xy(X, y)
    if n_grid < 1:
        raise InvalidConfig("n_grid must be >= 1")
    if not (0 < ratio <= 1):
        raise InvalidConfig("ratio must lie in (0, 1]")
    w = np.ones(X.shape[1]) if weights is None else np.asarray(weights, dtype=float)
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    scores = np.abs(Xc.T @ yc) / y.size
    with np.errstate(divide="ignore"):
        scores = np.where(w > 0, scores / np.maximum(w, 1e-300), 0.0)
    lam_max = float(scores.max()) / eta
    # a hair above the exact threshold so grid[0] zeroes every slope even
    # when the solver's dot products round the other way
    lam_max *= 1.0 + 1e-10
    if not np.isfinite(lam_max) or lam_max <= 0.0:
        lam_max = 1e-12  # y carries no signal; any tiny grid works
    if n_grid == 1:
        return np.array([lam_max])
    return lam_max * ratio ** (np.arange(n_grid) / (n_grid - 1))


def _path_betas(X, y, grid, eta, w, tol, max_iter):
    """Warm-started solutions along a descending grid, on raw (X, y)."""
    xbar = X.mean(axis=0)
    ybar = float(y.mean())
    Xc = np.asfortranarray(X - xbar)
    yc = y - ybar
    a = np.ascontiguousarray((Xc * Xc).mean(axis=0))
    p = X.shape[1]
    betas = np.empty((grid.size, p))
    intercepts = np.empty(grid.size)
    beta = np.zeros(p)
    for i, lam in enumerate(grid):
        thr = np.ascontiguousarray(lam * eta * w)
        r = yc - Xc @ beta
        _, converged = _cd_cycles(Xc, yc, a, thr, 2.0 * lam * (1.0 - eta), beta, r, tol, max_iter)
        if not converged:
            raise NotConverged(f"path fit at lam={lam:.3e} did not converge")
        betas[i] = beta
        intercepts[i] = ybar - float(xbar @ beta)
    return intercepts, betas


@dataclass
class CvResult:
    grid: np.ndarray
    cv_error: np.ndarray     # pooled mean squared out-of-fold error per lam
    lam: float               # selected lam, ties resolved toward the larger lam
    n_folds: int
    fold_ids: np.ndarray     # fold label per row
    shuffled: bool
    cv_se: np.ndarray | None = None   # fold-to-fold standard error per lam
    rule: str = "min"


def _fold_labels(T: int, n_folds: int, shuffled: bool, seed: int) -> np.ndarray:
    ids = np.empty(T, dtype=np.int64)
    for k, idx in enumerate(np.array_split(np.arange(T), n_folds)):
        ids[idx] = k
    if shuffled:
        ids = ids[np.random.default_rng(seed).permutation(T)]
    return ids


def cross_validate(
    X,
    y,
    spec: PenaltySpec,
    n_folds: int = 5,
    grid=None,
    shuffled: bool = False,
    seed: int = 0,
    tol: float = 1e-8,
    max_iter: int = 100_000,
    rule: str = "min",
) -> CvResult:
    """Blocked K-fold selection of lam over a shared descending grid.

    Folds are contiguous time blocks by default (shuffled=True opts into
    random folds). Out-of-fold squared errors are pooled over all rows,
    and ties in the minimum go to the larger lam. Adaptive weights are
    re-derived from each fold's training rows so no held-out information
    leaks into the pilot.

    rule="min" takes the pooled-error minimizer; rule="1se" takes the
    largest lam whose pooled error stays within one fold-to-fold standard
    error of that minimum. The minimizer predicts best but tends to let
    small spurious coefficients in; the one-standard-error rule trades a
    sliver of fit for a sparser, more stable active set.
    """
    X, y = _validate_xy(X, y)
    T = y.size
    if not (2 <= n_folds <= T):
        raise InvalidConfig(f"n_folds must lie in [2, {T}], got {n_folds}")
    if rule not in ("min", "1se"):
        raise InvalidConfig(f"unknown CV rule {rule!r}; pick 'min' or '1se'")
    if grid is None:
        w_full = _resolve_weights(X, y, spec, None)
        grid = lambda_grid(X, y, weights=w_full, eta=spec.effective_eta)
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) > 0):
        raise InvalidConfig("lambda grid must be non-increasing")

    ids = _fold_labels(T, n_folds, shuffled, seed)
    sq_err = np.zeros(grid.size)
    fold_mse = np.empty((n_folds, grid.size))
    for k in range(n_folds):
        test = ids == k
        train = ~test
        w_k = _resolve_weights(X[train], y[train], spec, None)
        intercepts, betas = _path_betas(
            X[train], y[train], grid, spec.effective_eta, w_k, tol, max_iter
        )
        pred = intercepts[None, :] + X[test] @ betas.T
        fold_sq = (y[test, None] - pred) ** 2
        sq_err += fold_sq.sum(axis=0)
        fold_mse[k] = fold_sq.mean(axis=0)
    cv_error = sq_err / T
    cv_se = fold_mse.std(axis=0, ddof=1) / np.sqrt(n_folds)
    best = int(np.argmin(cv_error))  # first minimum = largest lam on a descending grid
    if rule == "1se":
        best = int(np.argmax(cv_error <= cv_error[best] + cv_se[best]))
    return CvResult(
        grid=grid, cv_error=cv_error, lam=float(grid[best]),
        n_folds=n_folds, fold_ids=ids, shuffled=shuffled,
        cv_se=cv_se, rule=rule,
    )


def fit_cv(
    X,
    y,
    spec: PenaltySpec,
    n_folds: int = 5,
    n_grid: int = 100,
    ratio: float = 1e-4,
    shuffled: bool = False,
    seed: int = 0,
    tol: float = 1e-8,
    max_iter: int = 100_000,
    rule: str = "min",
) -> tuple[PenaltyFit, CvResult]:
    """Select lam by blocked CV (unless spec.lam is set) and refit on the
    full sample."""
    X, y = _validate_xy(X, y)
    w = _resolve_weights(X, y, spec, None)
    if spec.lam is not None:
        fit = fit_penalized(X, y, spec, weights=w, tol=tol, max_iter=max_iter)
        return fit, CvResult(
            grid=np.array([spec.lam]), cv_error=np.array([np.nan]), lam=spec.lam,
            n_folds=0, fold_ids=np.zeros(y.size, dtype=np.int64), shuffled=shuffled,
        )
    grid = lambda_grid(X, y, n_grid=n_grid, ratio=ratio, weights=w, eta=spec.effective_eta)
    cv = cross_validate(
        X, y, spec, n_folds=n_folds, grid=grid, shuffled=shuffled, seed=seed,
        tol=tol, max_iter=max_iter, rule=rule,
    )
    refit_spec = PenaltySpec(kind=spec.kind, lam=cv.lam, eta=spec.eta, gamma=spec.gamma)
    fit = fit_penalized(X, y, refit_spec, weights=w, tol=tol, max_iter=max_iter)
    return fit, cv
