import math

import numpy as np
import pytest
from sococast.core.generator import make_rng
from sococast.learners import BernsteinOnlineAggregation, boa_pathwise_bound, boa_theorem_bound
from sococast.schema.pubsub import Event
from sococast.utils.exceptions import ContractError

from tests.core.definitions import of_type


def test_boa_step():
    boa = BernsteinOnlineAggregation(np.array([0.5, 0.5]), range_bound=1.0)
    assert np.allclose(boa.predict(), [0.5, 0.5])
    assert boa.eta_cap == 0.5

    boa.step(np.array([0.5, -0.5]))
    assert np.allclose(boa.cum_loss, [0.625, -0.375])
    assert np.allclose(boa.sq_sums, [0.25, 0.25])
    assert np.allclose(boa.eta, [0.5, 0.5])
    e = math.exp(0.5)
    assert np.allclose(boa.predict(), [1.0 / (1.0 + e), e / (1.0 + e)])
    assert boa.predict() == pytest.approx([0.3775, 0.6225], abs=1e-4)


def test_boa_equal_losses():
    prior = np.array([0.2, 0.3, 0.5])
    boa = BernsteinOnlineAggregation(prior, range_bound=2.0)
    for loss in (1.0, -0.5, 2.0):
        boa.step(np.full(3, loss))
    assert np.allclose(boa.predict(), prior)
    assert np.allclose(boa.predict().sum(), 1.0)


def test_boa_learns_best_expert():
    rng = make_rng(4)
    boa = BernsteinOnlineAggregation(np.full(4, 0.25), range_bound=1.0)
    for _ in range(2000):
        losses = rng.uniform(-0.5, 0.5, size=4)
        losses[2] -= 0.3
        boa.step(losses)
    assert np.argmax(boa.predict()) == 2
    assert boa.predict()[2] > 0.9


def test_boa_pathwise_regret():
    rng = make_rng(9)
    prior = np.full(8, 1.0 / 8)
    boa = BernsteinOnlineAggregation(prior, range_bound=1.0, record_trace=True)
    for _ in range(500):
        boa.step(rng.uniform(-0.5, 0.5, size=8))
    W, L = boa.trace.arrays()
    assert W.shape == L.shape == (500, 8)
    assert np.allclose(W[0], prior)
    excess = np.einsum("tk,tk->t", W, L)[:, None] - L
    for i in range(8):
        V = float(np.sum(excess[:, i] ** 2))
        assert excess[:, i].sum() <= boa_pathwise_bound(V, prior[i], 1.0, 500)


def test_boa_clamp(events):
    boa = BernsteinOnlineAggregation(np.array([0.5, 0.5]), range_bound=1.0, record_trace=True)
    boa.step(np.array([3.0, -0.5]))
    boa.step(np.array([-2.0, 0.0]))
    assert boa.clamp_count == 2
    assert np.allclose(boa.trace.losses[0], [1.0, -0.5])

    clamps = of_type(events, Event.ClampEvent)
    assert clamps == [{"what": "expert loss", "t": 1, "value": 3.0}]


def test_boa_error():
    with pytest.raises(ContractError) as e:
        BernsteinOnlineAggregation(np.array([0.5, 0.6]), range_bound=1.0)
    assert "Var: prior should sum to 1" in str(e)

    with pytest.raises(ContractError) as e:
        BernsteinOnlineAggregation(np.array([1.0, 0.0]), range_bound=1.0)
    assert "Var: prior should be strictly positive" in str(e)

    with pytest.raises(ContractError) as e:
        BernsteinOnlineAggregation(np.array([]), range_bound=1.0)
    assert "Var: prior should be a non-empty vector" in str(e)

    boa = BernsteinOnlineAggregation(np.array([0.5, 0.5]), range_bound=1.0)
    with pytest.raises(ContractError) as e:
        boa.step(np.array([np.nan, 0.0]))
    assert "Var: feedback contains NaN or Inf" in str(e)


def test_boa_theorem_bound():
    assert boa_theorem_bound(1.0, 1.0, 1.0, 1.0 / 8, 0.05, 100) == pytest.approx(52.10, abs=0.01)
    assert boa_theorem_bound(1.0, 1.0, 1.0, 1.0, 0.05, 100, n_experts=1) > 0.0

    with pytest.raises(ContractError) as e:
        boa_theorem_bound(1.0, 1.0, 1.0, 1.0 / 8, 0.05, 3)
    assert "Var: T should be at least 4, got: 3" in str(e)

    with pytest.raises(ContractError) as e:
        boa_pathwise_bound(1.0, 0.5, 1.0, 2)
    assert "Var: T should be at least 4, got: 2" in str(e)
