"""Shared fixtures: small deterministic panels used across the suite."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from volcast.panel_data import IntradayPanel, RealizedPanel
from volcast.simulate import synthetic_days

# numba JIT warm-up on first call can blow the default deadline
settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def make_rv_panel(n_firms=3, n_days=120, seed=7, with_measures=True):
    """Strictly positive persistent rv panel, optionally with bpv/rq/jump
    attached (bpv is a fraction of rv so jump = rv - bpv is exact)."""
    rng = np.random.default_rng(seed)
    x = np.empty((n_days, n_firms))
    x[0] = rng.uniform(0.5, 1.5, n_firms)
    for t in range(1, n_days):
        x[t] = 0.2 + 0.8 * x[t - 1] + 0.2 * rng.standard_normal(n_firms)
    rv = np.exp(0.3 * x)
    firms = [f"F{j:02d}" for j in range(n_firms)]
    days = synthetic_days(n_days)
    if not with_measures:
        return RealizedPanel(firms=firms, days=days, rv=rv)
    frac = rng.uniform(0.6, 1.0, size=rv.shape)
    bpv = rv * frac
    rq = rv ** 2 * rng.uniform(0.8, 1.2, size=rv.shape)
    jump = rv - bpv
    return RealizedPanel(firms=firms, days=days, rv=rv, bpv=bpv, rq=rq, jump=jump)


def make_intraday_panel(n_firms=2, n_days=8, n_intraday=13, seed=3):
    rng = np.random.default_rng(seed)
    firms = [f"F{j:02d}" for j in range(n_firms)]
    days = synthetic_days(n_days)
    returns = {
        f: [0.05 * rng.standard_normal(n_intraday) for _ in days] for f in firms
    }
    return IntradayPanel(firms=firms, days=days, returns=returns)


@pytest.fixture
def rv_panel():
    return make_rv_panel()


@pytest.fixture
def rv_only_panel():
    return make_rv_panel(with_measures=False)


@pytest.fixture
def intraday_panel():
    return make_intraday_panel()
