import numpy as np
import pytest
from pydantic import TypeAdapter, ValidationError
from sococast.schema.forecast import (
    ArchConfig,
    ConditionalLaw,
    CParameter,
    GaussianForecast,
    LawPath,
    MixtureConfig,
    as_law_path,
    gaussian_mask,
    law_arrays,
)


def test_gaussian_forecast():
    forecast = GaussianForecast(mean=0.5, variance=2.0)
    assert forecast.variance == 2.0
    with pytest.raises(ValidationError):
        GaussianForecast(mean=0.0, variance=0.0)
    with pytest.raises(ValidationError):
        forecast.mean = 1.0


def test_law_path():
    laws = [ConditionalLaw(mean=float(i), variance=1.0 + i) for i in range(5)]
    path = LawPath(laws)
    assert len(path) == 5
    assert np.array_equal(path.means, [0.0, 1.0, 2.0, 3.0, 4.0])
    assert np.array_equal(path.variances, [1.0, 2.0, 3.0, 4.0, 5.0])
    assert path.gaussian.all()

    assert isinstance(path[2], ConditionalLaw)
    assert path[2].mean == 2.0
    assert path[np.int64(3)].mean == 3.0

    tail = path[3:]
    assert isinstance(tail, LawPath)
    assert np.array_equal(tail.means, [3.0, 4.0])

    picked = path[np.array([4, 0])]
    assert np.array_equal(picked.variances, [5.0, 1.0])

    assert as_law_path(path) is path
    assert isinstance(as_law_path(laws), LawPath)


def test_law_arrays():
    laws = [
        ConditionalLaw(mean=0.1, variance=1.0),
        ConditionalLaw(mean=-0.2, variance=3.0, density=lambda y: np.exp(-(y**2) / 2)),
    ]
    means, variances = law_arrays(laws)
    assert np.array_equal(means, [0.1, -0.2])
    assert np.array_equal(variances, [1.0, 3.0])
    assert np.array_equal(gaussian_mask(laws), [True, False])
    assert np.array_equal(gaussian_mask(LawPath(laws)), [True, False])
    assert not laws[1].is_gaussian


def test_c_parameter():
    adapter = TypeAdapter(CParameter)
    assert adapter.validate_python(1.5) == 1.5
    for c in (1.0, 2.0, 0.5):
        with pytest.raises(ValidationError) as e:
            adapter.validate_python(c)
        assert "c must lie in (1, 2)" in str(e)

    cfg = ArchConfig(c=1.2, sigma_bar2=5.0)
    assert cfg.variance_floor == pytest.approx(3.0)
    assert cfg.radius == pytest.approx(0.4)


def test_mixture_config():
    cfg = MixtureConfig()
    assert cfg.K == 4
    assert cfg.exact_grad_bound == pytest.approx(60.0)
    assert MixtureConfig(K1=2, K2=1, K3=2).K == 12

    with pytest.raises(ValidationError) as e:
        MixtureConfig(m=0.5, M=0.1)
    assert "m must not exceed M" in str(e)

    with pytest.raises(ValidationError):
        MixtureConfig(components=[])
