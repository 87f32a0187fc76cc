import math

import numpy as np
import pytest
from sococast.core.generator import make_rng
from sococast.forecasters.ar import ArForecaster, ar_clip, ar_features, ar_loss_grad
from sococast.forecasters.kl import kl_gaussian
from sococast.geometry.sets import L1Ball
from sococast.schema.forecast import ArConfig, ConditionalLaw
from sococast.sim.verification import FD_RTOL, finite_difference_error


def test_ar_features():
    cfg = ArConfig(p=2, D=math.sqrt(2.0))
    assert np.allclose(ar_features(np.array([7.0, -0.3, 0.5]), cfg), [0.5, -0.3])
    assert np.allclose(ar_features(np.array([5.0]), ArConfig(p=1, D=math.sqrt(2.0))), [1.0])
    assert np.array_equal(ar_features(np.array([]), cfg), [0.0, 0.0])
    assert np.allclose(ar_clip(np.array([-3.0, 0.2]), 2.0), [-math.sqrt(2.0), 0.2])


def test_ar_loss_grad():
    cfg = ArConfig(p=1, sigma2=1.0)
    loss, grad = ar_loss_grad(np.zeros(1), np.array([0.4]), 0.0, cfg)
    assert loss == 0.0
    assert np.allclose(grad, [0.0])
    loss, grad = ar_loss_grad(np.array([1.0]), np.array([1.0]), 0.0, cfg)
    assert loss == pytest.approx(0.5)
    assert np.allclose(grad, [1.0])
    loss, _ = ar_loss_grad(np.array([1.0]), np.array([1.0]), 0.0, ArConfig(p=1, sigma2=2.0))
    assert loss == pytest.approx(0.25)


def test_ar_forecaster():
    cfg = ArConfig(p=3, D=2.0)
    forecaster = ArForecaster(cfg)
    assert isinstance(forecaster.feasible_set, L1Ball)
    assert forecaster.dim == 3
    assert forecaster.warmup == 3
    assert forecaster.alpha == pytest.approx(0.25)

    samples = make_rng(0).standard_normal(20) * 2.0
    design = forecaster.design(samples)
    assert design.shape == (20, 3)
    for t in range(20):
        assert np.allclose(design[t], forecaster.features(samples[:t]))

    x = np.array([0.2, -0.3, 0.1])
    forecast = forecaster.forecast(x, design[5])
    assert forecast.mean == pytest.approx(float(x @ design[5]))
    assert forecast.variance == 1.0

    law = ConditionalLaw(mean=0.4, variance=0.8)
    assert forecaster.risk(x, design[5], law) == pytest.approx(kl_gaussian(law, forecast))


def test_ar_risk_gradient():
    forecaster = ArForecaster(ArConfig(p=2))
    rng = make_rng(1)
    features = np.array([0.6, -1.1])
    law = ConditionalLaw(mean=0.3, variance=1.2)
    for x in forecaster.feasible_set.sample(rng, 20, vertex_prob=0.2):
        h = 1e-6
        fd = [
            (forecaster.risk(x + h * e, features, law) - forecaster.risk(x - h * e, features, law)) / (2 * h)
            for e in np.eye(2)
        ]
        assert np.allclose(forecaster.risk_grad(x, features, law), fd, atol=1e-6)


def test_ar_finite_differences():
    forecaster = ArForecaster(ArConfig(p=4))
    rng = make_rng(2)
    for x in forecaster.feasible_set.sample(rng, 200, vertex_prob=0.2):
        features = ar_clip(2.0 * rng.standard_normal(4), 2.0)
        y = 2.0 * rng.standard_normal()
        assert finite_difference_error(forecaster, x, features, y) <= FD_RTOL


def test_ar_overrides():
    forecaster = ArForecaster(ArConfig(p=1), alpha=0.1, grad_bound_value=3.0)
    assert forecaster.alpha == 0.1
    assert forecaster.grad_bound == 3.0
    assert ArForecaster(ArConfig(p=1, grad_bound=5.0)).grad_bound == 5.0
