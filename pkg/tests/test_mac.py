import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustdep.dgp import DgpSpec, simulate_ar_arch
from robustdep.errors import ConfigError, DataError, DegenerateSeriesError
from robustdep.groups import run_group_test
from robustdep.hac import KernelSpec, hac_test
from robustdep.mac import (
    batch_mac,
    mac_from_correlations,
    mac_group_test,
    mac_hac_test,
    mac_statistic,
    mac_weights,
)
from robustdep.series import DependenceSpec, dependence_estimate

X = simulate_ar_arch(DgpSpec(alpha=0.5, phi=0.1, T=4000, seed=31))


def test_arithmetic_example():
    assert mac_from_correlations([0.1, 0.2, 0.3, 0.4, 0.5], "equal") == pytest.approx(0.3, abs=1e-15)


def test_zero_weights():
    assert mac_statistic(X, 5, np.zeros(5)) == 0.0


def test_weight_presets():
    np.testing.assert_allclose(mac_weights("equal", 4), [0.25] * 4)
    np.testing.assert_allclose(mac_weights("variance_ratio", 4), [1.6, 1.2, 0.8, 0.4])
    with pytest.raises(ConfigError):
        mac_weights("bogus", 3)
    with pytest.raises(ConfigError):
        mac_weights([1.0, 2.0], 3)
    with pytest.raises(ConfigError):
        mac_weights([1.0, math.nan], 2)


@pytest.mark.parametrize("weights", ["equal", "variance_ratio", [0.5, -1.0, 2.0]])
def test_matches_sum_of_correlations(weights):
    H = 3
    w = mac_weights(weights, H)
    direct = sum(w[h - 1] * dependence_estimate(X, DependenceSpec("signed_power_crosscorr", 0.5, h))
                 for h in range(1, H + 1))
    assert mac_statistic(X, H, weights, 0.5) == pytest.approx(direct, abs=1e-14)


def test_iid_near_zero():
    x = np.random.default_rng(8).standard_normal(10**5)
    assert abs(mac_statistic(x, 5)) < 3 * math.sqrt(5) / math.sqrt(10**5)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.floats(1e-3, 1e3))
def test_scale_invariance(seed, lam):
    x = np.random.default_rng(seed).standard_t(4, 300)
    assert mac_statistic(lam * x, 5, s=0.25) == pytest.approx(mac_statistic(x, 5, s=0.25), abs=1e-12)


def test_batch_rows():
    rows = np.stack([X[:1000], X[1000:2000]])
    np.testing.assert_array_equal(batch_mac(rows, 5), [mac_statistic(X[:1000], 5), mac_statistic(X[1000:2000], 5)])


def test_single_lag_reduces_to_group_test():
    spec = DependenceSpec("signed_power_crosscorr", 0.25, 1)
    a = mac_group_test(X, 1, [1.0], 0.25, q=8)
    b = run_group_test(X, spec, q=8)
    assert a.t_stat == pytest.approx(b.t_stat, abs=1e-12)
    assert a.ci == pytest.approx(b.ci, abs=1e-12)


@pytest.mark.parametrize("kernel", [KernelSpec(), KernelSpec("bartlett"), KernelSpec(bandwidth=4.0)])
def test_single_lag_reduces_to_hac_test(kernel):
    spec = DependenceSpec("signed_power_crosscorr", 1.0, 1)
    a = mac_hac_test(X, 1, [1.0], 1.0, kernel=kernel)
    b = hac_test(X, spec, kernel=kernel)
    assert a.estimate == pytest.approx(b.estimate, abs=1e-14)
    assert a.std_err == pytest.approx(b.std_err, rel=1e-12)
    assert a.bandwidth_used == pytest.approx(b.bandwidth_used, rel=1e-12)


def test_hac_fields():
    r = mac_hac_test(X, 5, "equal", 0.5, beta0=0.01)
    assert r.estimate == pytest.approx(mac_statistic(X, 5, "equal", 0.5), abs=1e-14)
    assert r.t_stat == pytest.approx((r.estimate - 0.01) / r.std_err)
    assert r.ci[0] < r.estimate < r.ci[1]


def test_group_fields():
    r = mac_group_test(X, 5, "equal", 1.0, q=8)
    groups = X[: 8 * (X.size // 8)].reshape(8, -1)
    np.testing.assert_allclose(r.estimates, [mac_statistic(g, 5) for g in groups], atol=1e-14)


def test_errors():
    with pytest.raises(DataError):
        mac_statistic(np.arange(5.0), 5)
    with pytest.raises(DegenerateSeriesError):
        mac_statistic(np.ones(100), 5)
    with pytest.raises(DataError):
        mac_group_test(np.arange(40.0), 5, q=8)
    with pytest.raises(DataError):
        mac_hac_test(np.arange(12.0), 5)
