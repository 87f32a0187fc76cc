import math

import numpy as np
import pytest
from scipy import stats
from sococast.core.generator import make_rng
from sococast.forecasters.kl import (
    gaussian_density,
    gaussian_quadratic_moment,
    kl_gaussian,
    kl_mixture,
    law_expectation,
    mixture_log_density,
)
from sococast.schema.forecast import ConditionalLaw, GaussianForecast


def test_kl_gaussian():
    law = ConditionalLaw(mean=0.3, variance=1.7)
    assert kl_gaussian(law, GaussianForecast(mean=0.3, variance=1.7)) == pytest.approx(0.0, abs=1e-15)
    value = kl_gaussian(ConditionalLaw(mean=0.0, variance=1.0), GaussianForecast(mean=0.0, variance=2.0))
    assert value == pytest.approx(0.5 * (math.log(2.0) - 0.5))
    assert value == pytest.approx(0.0966, abs=1e-4)
    assert kl_gaussian(law, GaussianForecast(mean=1.0, variance=1.7)) > 0.0


def test_kl_gaussian_monte_carlo():
    p, q = ConditionalLaw(mean=0.5, variance=1.0), GaussianForecast(mean=-0.2, variance=2.5)
    y = make_rng(1).normal(p.mean, math.sqrt(p.variance), size=10**6)
    log_ratio = stats.norm.logpdf(y, p.mean, math.sqrt(p.variance)) - stats.norm.logpdf(
        y, q.mean, math.sqrt(q.variance)
    )
    standard_error = log_ratio.std() / math.sqrt(y.size)
    assert abs(log_ratio.mean() - kl_gaussian(p, q)) <= 3.0 * standard_error


def test_kl_mixture():
    law = ConditionalLaw(mean=0.0, variance=1.0)
    single = [GaussianForecast(mean=0.0, variance=2.0)]
    assert kl_mixture(law, np.array([1.0]), single) == pytest.approx(
        kl_gaussian(law, single[0]), abs=1e-6
    )

    components = [GaussianForecast(mean=-1.0, variance=0.5), GaussianForecast(mean=2.0, variance=1.5)]
    weights = np.array([0.3, 0.7])
    mean = float(weights @ [-1.0, 2.0])
    variance = float(weights @ [0.5 + 1.0, 1.5 + 4.0]) - mean**2

    def density(y):
        return np.exp(mixture_log_density(np.asarray(y, dtype=float), weights, components))

    mixture_law = ConditionalLaw(mean=mean, variance=variance, density=density)
    assert kl_mixture(mixture_law, weights, components) == pytest.approx(0.0, abs=1e-7)


def test_kl_mixture_monotone():
    law = ConditionalLaw(mean=0.0, variance=1.0)
    components = [GaussianForecast(mean=0.0, variance=1.0), GaussianForecast(mean=3.0, variance=1.0)]
    values = [kl_mixture(law, np.array([w, 1.0 - w]), components) for w in (0.1, 0.5, 0.9)]
    assert values[0] > values[1] > values[2] > 0.0


def test_law_expectation():
    law = ConditionalLaw(mean=1.0, variance=4.0)
    assert law_expectation(law, lambda y: y**2) == pytest.approx(5.0, rel=1e-10)

    def density(y):
        return stats.norm.pdf(y, loc=1.0, scale=2.0)

    other = ConditionalLaw(mean=1.0, variance=4.0, density=density)
    assert not other.is_gaussian
    assert law_expectation(other, lambda y: y**2) == pytest.approx(5.0, rel=1e-6)

    vector = law_expectation(law, lambda y: np.stack([y, y**2], axis=-1))
    assert np.allclose(vector, [1.0, 5.0])


def test_gaussian_quadratic_moment():
    zero, one = np.zeros(1), np.ones(1)
    assert gaussian_quadratic_moment(one, zero, zero, zero, one) == pytest.approx([1.0])
    assert gaussian_quadratic_moment(zero, one, zero, zero, one) == pytest.approx([3.0])
    assert gaussian_quadratic_moment(zero, zero, 2.0 * one, zero, one) == pytest.approx([4.0])

    rng = make_rng(3)
    A, B, C, delta, var = 0.7, -0.4, 0.2, 0.5, 1.3
    z = rng.normal(delta, math.sqrt(var), size=10**6)
    samples = (C + A * z + B * z**2) ** 2
    exact = gaussian_quadratic_moment(
        np.array([A]), np.array([B]), np.array([C]), np.array([delta]), np.array([var])
    )[0]
    assert abs(samples.mean() - exact) <= 4.0 * samples.std() / math.sqrt(z.size)


def test_gaussian_density():
    forecast = GaussianForecast(mean=1.0, variance=4.0)
    assert gaussian_density(1.0, forecast) == pytest.approx(1.0 / math.sqrt(8.0 * math.pi))
    values = gaussian_density(np.array([-1.0, 3.0]), forecast)
    assert values[0] == pytest.approx(values[1])
    assert values[0] == pytest.approx(stats.norm.pdf(1.0) / 2.0)
