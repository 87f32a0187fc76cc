import numpy as np
import pytest
from sococast.utils.exceptions import ContractError, DefinitionError

from tests.core.definitions import (
    ConstantForecaster,
    ConstantForecasterBroken1,
    ConstantForecasterBroken2,
    ConstantForecasterBroken3,
    ConstantForecasterBroken4,
    standard_law,
)


def test_constant_forecaster():
    forecaster = ConstantForecaster()
    output = forecaster(np.array([0.5]), np.zeros(1), 1.5)
    assert output.loss == pytest.approx(0.5)
    assert np.allclose(output.grad, [-1.0])
    assert forecaster.dim == 1
    assert forecaster.diameter == pytest.approx(2.0)

    oracle = forecaster.oracle(np.zeros(1), 0.0)
    assert np.allclose(oracle(np.array([0.25])), [0.25])


def test_forecaster_risk():
    forecaster = ConstantForecaster()
    law = standard_law()
    assert forecaster.risk(np.array([0.5]), np.zeros(1), law) == pytest.approx(0.125)
    assert np.allclose(forecaster.risk_grad(np.array([0.5]), np.zeros(1), law), [0.5])
    assert forecaster.grad_second_moment(
        np.array([0.5]), np.array([2.0]), np.zeros(1), law
    ) == pytest.approx(4.0 * 1.25)

    laws = [law] * 4
    design = forecaster.design(np.zeros(4))
    assert forecaster.cumulative_risk(np.array([1.0]), design, laws) == pytest.approx(2.0)
    assert np.allclose(forecaster.cumulative_risk_grad(np.array([1.0]), design, laws), [4.0])


def test_forecaster_h2_margins():
    forecaster = ConstantForecaster()
    rng = np.random.default_rng(0)
    at = rng.uniform(-1.0, 1.0, size=(200, 1))
    other = rng.uniform(-1.0, 1.0, size=(200, 1))
    design = forecaster.design(np.zeros(200))
    laws = [standard_law()] * 200

    margins = forecaster.h2_margins(at, other, design, laws, alpha=0.4)
    assert np.all(margins <= 1e-12)
    risk_margins = forecaster.h2_margins(at, other, design, laws, alpha=0.9, moment="risk")
    assert np.all(risk_margins <= 1e-12)
    assert np.any(forecaster.h2_margins(at, other, design, laws, alpha=10.0) > 0.0)

    same = forecaster.h2_margins(at, at, design, laws, alpha=10.0)
    assert np.all(same == 0.0)

    with pytest.raises(ValueError) as e:
        forecaster.h2_margins(at, other, design, laws, alpha=0.4, moment="fourth")
    error_str = str(e)
    error_str = error_str.replace('"', "'")
    assert "moment should be one of ('conditional', 'risk'), got: fourth" in error_str


def test_forecaster_error():
    with pytest.raises(DefinitionError) as e:
        ConstantForecasterBroken1()
    error_str = str(e)
    error_str = error_str.replace('"', "'")
    assert (
        "ConstantForecasterBroken1._loss_grad expects parameters: ['features', 'self', 'x', 'y'],"
        " got: ['features', 'obs', 'self', 'x']" in error_str
    )

    forecaster = ConstantForecasterBroken2()
    with pytest.raises(TypeError) as e:
        forecaster(np.zeros(1), np.zeros(1), 0.0)
    error_str = str(e)
    error_str = error_str.replace('"', "'")
    assert (
        "Func: ConstantForecasterBroken2._loss_grad output expected type: <class 'tuple'>"
        in error_str
    )

    forecaster = ConstantForecasterBroken3()
    with pytest.raises(NotImplementedError) as e:
        forecaster(np.zeros(1), np.zeros(1), 0.0)
    error_str = str(e)
    error_str = error_str.replace('"', "'")
    assert "Please call `Forecaster` init method from your subclass init method" in error_str

    forecaster = ConstantForecasterBroken4()
    with pytest.raises(ContractError) as e:
        forecaster(np.zeros(1), np.zeros(1), 0.0)
    assert "Var: grad contains NaN or Inf" in str(e)


def test_forecaster_dimension():
    forecaster = ConstantForecaster()
    with pytest.raises(ContractError) as e:
        forecaster(np.zeros(2), np.zeros(1), 0.0)
    assert "Var: x should be a vector of dimension 1, got shape: (2,)" in str(e)
