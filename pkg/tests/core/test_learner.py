import numpy as np
import pytest
from sococast.utils.exceptions import ContractError

from tests.core.definitions import Cumulator, CumulatorBroken


def test_learner_protocol():
    learner = Cumulator()
    assert learner.t == 0
    assert np.allclose(learner.predict(), [0.0, 0.0])

    assert learner.step(np.array([1.0, 2.0])) is learner
    assert learner.t == 1
    x = learner.observe(lambda x: x + 1.0)
    assert np.allclose(x, [1.0, 2.0])
    assert np.allclose(learner.predict(), [3.0, 5.0])
    assert learner.t == 2


def test_learner_prediction_is_a_copy():
    learner = Cumulator()
    x = learner.predict()
    x[0] = 10.0
    assert np.allclose(learner.predict(), [0.0, 0.0])


def test_learner_feedback_error():
    learner = Cumulator()
    with pytest.raises(ContractError) as e:
        learner.step(np.array([1.0, 2.0, 3.0]))
    assert "Var: feedback should be a vector of dimension 2, got shape: (3,)" in str(e)

    with pytest.raises(ContractError) as e:
        learner.step(np.array([1.0, np.inf]))
    assert "Var: feedback contains NaN or Inf" in str(e)
    assert learner.t == 0


def test_learner_error():
    learner = CumulatorBroken()
    with pytest.raises(NotImplementedError) as e:
        learner.predict()
    error_str = str(e)
    error_str = error_str.replace('"', "'")
    assert "Please call `OnlineLearner` init method from your subclass init method" in error_str

    with pytest.raises(ContractError) as e:
        Cumulator(dim=0)
    assert "Var: dim should be greater than or equal to 1, got: 0" in str(e)
