import math

import numpy as np
import pytest
from scipy import stats

from robustdep import rng
from robustdep.dgp import (
    DgpSpec,
    InnovationDist,
    kesten_zeta,
    log_moment,
    sample_innovation,
    simulate_ar_arch,
    simulate_batch,
)
from robustdep.errors import ConfigError

N = 10**6
KESTEN3 = math.pi ** (1 / 3) / 2


def draws(dist, n=N, seed=0):
    return dist.sample(rng.stream(seed, 0), n)


class TestInnovations:
    def test_symmetric_skewness(self):
        z = draws(InnovationDist.skewed_t(8, 0.0))
        se = math.sqrt(6 / N) * 3  # generous: heavy-ish tails inflate the skewness SE
        assert abs(stats.skew(z)) < 4 * se

    def test_standardized_moments(self):
        z = draws(InnovationDist.skewed_t(50, 0.5), seed=1)
        assert abs(z.mean()) < 4 / math.sqrt(N)
        kurt = stats.kurtosis(z, fisher=False)
        assert abs(z.var() - 1) < 4 * math.sqrt((kurt - 1) / N)

    def test_student_kurtosis(self):
        z = draws(InnovationDist.skewed_t(50, 0.0), seed=2)
        assert stats.kurtosis(z) == pytest.approx(6 / 46, abs=0.03)

    def test_normal_draws(self):
        z = draws(InnovationDist.normal(), seed=3)
        assert stats.kstest(z[:100_000], "norm").pvalue > 1e-3

    def test_density_standardized(self):
        d = InnovationDist.skewed_t(3.5, -0.3)
        assert d.expect(lambda z: 1.0) == pytest.approx(1.0, abs=1e-10)
        assert d.expect(lambda z: z) == pytest.approx(0.0, abs=1e-10)
        assert d.expect(lambda z: z * z) == pytest.approx(1.0, abs=1e-8)

    def test_ppf_inverts_cdf(self):
        d = InnovationDist.skewed_t(3.0, 0.5)
        u = np.array([1e-9, 0.01, 0.25, 0.2499, 0.2501, 0.5, 0.9, 1 - 1e-9])
        np.testing.assert_allclose(d.cdf(d.ppf(u)), u, rtol=1e-9)

    def test_validation(self):
        with pytest.raises(ConfigError):
            InnovationDist.skewed_t(2.0, 0.1)
        with pytest.raises(ConfigError):
            InnovationDist.skewed_t(5.0, 1.0)

    def test_single_draw(self):
        v = sample_innovation(InnovationDist.normal(), rng.stream(5))
        assert isinstance(v, float) and math.isfinite(v)


class TestSimulation:
    def test_iid_variance(self):
        x = simulate_ar_arch(DgpSpec(T=N, seed=9))
        assert x.var() == pytest.approx(0.1, abs=4 * 0.1 * math.sqrt(2 / N))

    def test_arch_variance(self):
        x = simulate_ar_arch(DgpSpec(alpha=0.5, T=N, seed=10))
        # ARCH(1) with alpha = 0.5 has finite fourth moment (3 alpha^2 < 1); tolerance allows for clustering
        assert x.var() == pytest.approx(0.2, rel=0.03)

    def test_deterministic(self):
        spec = DgpSpec(alpha=0.4, beta=0.3, phi=0.2, innovation=InnovationDist.skewed_t(5, 0.2), seed=77)
        assert np.array_equal(simulate_ar_arch(spec, 3), simulate_ar_arch(spec, 3))
        assert not np.array_equal(simulate_ar_arch(spec, 3), simulate_ar_arch(spec, 4))

    def test_batch_rows_equal_single(self):
        spec = DgpSpec(alpha=KESTEN3, T=500, seed=5)
        batch = simulate_batch(spec, [7, 2, 9])
        for row, rep in zip(batch, [7, 2, 9]):
            assert np.array_equal(row, simulate_ar_arch(spec, rep))

    def test_initial_variance(self):
        assert DgpSpec(alpha=0.3, beta=0.5).sigma2_0 == pytest.approx(0.1 / 0.2)
        assert DgpSpec(alpha=0.1, beta=0.9).sigma2_0 == 0.1

    def test_ar_recursion(self):
        spec = DgpSpec(phi=0.6, alpha=0.2, T=50, burn_in=0, seed=3)
        x = simulate_ar_arch(spec)
        z = spec.innovation.sample(rng.stream(3, 0), 50)
        s2, r, out = spec.sigma2_0, 0.0, []
        for t in range(50):
            eps = math.sqrt(s2) * z[t]
            r = 0.6 * r + eps
            out.append(r)
            s2 = 0.1 + 0.2 * eps * eps
        np.testing.assert_allclose(x, out, rtol=1e-15)

    def test_stationarity_check(self):
        with pytest.raises(ConfigError, match="not stationary"):
            DgpSpec(alpha=4.0)
        # IGARCH with alpha + beta = 1 is strictly stationary
        DgpSpec(alpha=0.1, beta=0.9)

    @pytest.mark.parametrize("bad", [dict(phi=1.0), dict(omega=0.0), dict(alpha=-0.1), dict(T=0), dict(seed=-1)])
    def test_invalid(self, bad):
        with pytest.raises(ConfigError):
            DgpSpec(**bad)


class TestKesten:
    def test_anchors(self):
        assert kesten_zeta(KESTEN3, 0, InnovationDist.normal()) == pytest.approx(3.0, abs=1e-8)
        assert kesten_zeta(3 ** -0.5, 0, InnovationDist.normal()) == pytest.approx(4.0, abs=1e-8)
        for a in (0.1, 0.5):
            assert kesten_zeta(a, 1 - a, InnovationDist.normal()) == pytest.approx(2.0, abs=1e-8)

    def test_skewed_t(self):
        assert kesten_zeta(KESTEN3, 0, InnovationDist.skewed_t(50, 0.5)) == pytest.approx(2.89, abs=0.02)
        assert kesten_zeta(KESTEN3, 0, InnovationDist.skewed_t(3, 0.5)) == pytest.approx(2.24, abs=0.02)

    def test_monotone_in_alpha(self):
        grid = np.linspace(0.2, 0.95, 12)
        z = [kesten_zeta(a, 0.0, InnovationDist.normal()) for a in grid]
        assert all(b < a for a, b in zip(z, z[1:]))

    def test_moment_gate_p2(self):
        # zeta = 8 at alpha = 105^(-1/4): alpha^4 E[Z^8] = 1
        a = 105 ** -0.25
        assert a == pytest.approx(0.3124, abs=1e-4)
        assert kesten_zeta(a, 0.0, InnovationDist.normal()) == pytest.approx(8.0, abs=1e-7)

    def test_p1_threshold_value(self):
        assert 3 ** -0.5 == pytest.approx(0.57735, abs=1e-5)

    def test_requires_stationarity(self):
        with pytest.raises(ConfigError):
            kesten_zeta(4.0, 0.0, InnovationDist.normal())

    def test_log_moment_sign(self):
        assert log_moment(KESTEN3, 0.0, InnovationDist.normal()) < 0
        assert log_moment(4.0, 0.0, InnovationDist.normal()) > 0
        # alpha + beta > 1 can still be strictly stationary
        assert log_moment(0.5, 0.6, InnovationDist.normal()) < 0
