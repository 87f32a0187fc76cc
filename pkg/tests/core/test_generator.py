import numpy as np
import pytest
from sococast.core.generator import BIT_GENERATOR, make_rng
from sococast.schema.forecast import LawPath
from sococast.utils.exceptions import ContractError

from tests.core.definitions import ConstantWalk, ConstantWalkBroken


def test_generator():
    samples, laws = ConstantWalk(seed=3)(50)
    assert samples.shape == (50,)
    assert isinstance(laws, LawPath)
    assert len(laws) == 50
    assert laws[0].mean == 0.0
    # laws[t] only depends on samples[:t]
    assert np.allclose(laws.means[1:], 0.5 * samples[:-1])


def test_generator_is_reproducible():
    a, _ = ConstantWalk(seed=7)(100)
    b, _ = ConstantWalk(seed=7)(100)
    c, _ = ConstantWalk(seed=8)(100)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert BIT_GENERATOR == "numpy.random.Philox"
    assert isinstance(make_rng(0).bit_generator, np.random.Philox)


def test_generator_error():
    with pytest.raises(TypeError) as e:
        ConstantWalkBroken()(3)
    error_str = str(e)
    error_str = error_str.replace('"', "'")
    assert (
        "Func: ConstantWalkBroken._next_law output expected type:"
        " <class 'sococast.schema.forecast.ConditionalLaw'>" in error_str
    )

    with pytest.raises(ContractError) as e:
        ConstantWalk()(0)
    assert "Var: T should be greater than or equal to 1, got: 0" in str(e)
