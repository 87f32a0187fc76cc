import math

import numpy as np
import pytest
from sococast.schema.config import ExperimentConfig, Garch11Spec, GaussianIidSpec, LearnerSpec
from sococast.schema.forecast import ArchConfig, ArConfig, ConditionalLaw, LawPath
from sococast.schema.pubsub import Event
from sococast.sim.harness import (
    ambient_forecaster,
    build_forecaster,
    build_learner,
    comparator_search,
    run_experiment,
    run_seeds,
    simulate,
)
from sococast.utils.exceptions import ConfigurationError

from tests.core.definitions import ConstantForecaster, of_type


def small_config(**kwargs) -> ExperimentConfig:
    kwargs.setdefault("T", 60)
    kwargs.setdefault("seeds", [0])
    return ExperimentConfig(**kwargs)


def test_comparator_search():
    forecaster = ConstantForecaster()
    laws = LawPath([ConditionalLaw(mean=0.3, variance=1.0)] * 10)
    design = forecaster.design(np.zeros(10))
    result = comparator_search(laws, forecaster, design, n_certify=100)
    assert result.certified
    assert result.x_star == pytest.approx([0.3], abs=1e-6)
    assert result.cum_risk == pytest.approx(0.0, abs=1e-9)

    laws = LawPath([ConditionalLaw(mean=2.0, variance=1.0)] * 10)
    result = comparator_search(laws, forecaster, design, n_certify=100)
    assert result.x_star == pytest.approx([1.0], abs=1e-9)
    assert result.cum_risk == pytest.approx(10 * 0.5, rel=1e-9)


def test_simulate_ons(events):
    config = small_config()
    result = simulate(config)
    records = result.records
    assert [r.t for r in records] == list(range(1, 61))
    assert result.predictions.shape == (60, 2)
    assert result.certified
    for r in records:
        assert r.regret == pytest.approx(r.cum_risk - r.comparator_cum_risk)
        assert r.inst_risk >= 0.0
        assert math.isfinite(r.theorem_bound_value) and r.theorem_bound_value > 0.0
        assert r.weights_snapshot is None
    assert np.all(np.diff([r.cum_risk for r in records]) >= 0.0)
    assert result.comparator_cum_risk == pytest.approx(records[-1].comparator_cum_risk, rel=1e-9)
    assert result.terminal_regret >= -1e-6
    assert not result.exceeded
    assert result.trace is None

    assert of_type(events, Event.SeedStart) == [{"seed": 0}]
    end = of_type(events, Event.SeedEnd)
    assert len(end) == 1
    assert end[0]["regret"] == result.terminal_regret
    assert of_type(events, Event.WarmUp) == [{"rounds": 2}]
    assert len(of_type(events, Event.ComparatorSearch)) == 1


def test_simulate_deterministic():
    config = small_config()
    a, b = simulate(config), simulate(config)
    assert np.array_equal(a.predictions, b.predictions)
    assert [r.regret for r in a.records] == [r.regret for r in b.records]
    assert run_experiment(config)[-1].regret == a.terminal_regret


def test_simulate_comparator_learner():
    result = simulate(small_config(learner=LearnerSpec(kind="comparator")))
    assert all(r.regret == pytest.approx(0.0, abs=1e-12) for r in result.records)
    assert all(r.theorem_bound_value == 0.0 for r in result.records)


def test_simulate_boa_ons():
    config = small_config(learner=LearnerSpec(kind="boa_ons", gamma_grid_size=6))
    result = simulate(config)
    assert len(result.expert_weights) == 6
    assert sum(result.expert_weights.values()) == pytest.approx(1.0)
    for r in result.records:
        assert len(r.weights_snapshot) == 6
        assert sum(r.weights_snapshot) == pytest.approx(1.0)

    no_snapshots = small_config(learner=LearnerSpec(kind="boa_ons", gamma_grid_size=6, weights_snapshot=False))
    assert simulate(no_snapshots).records[-1].weights_snapshot is None


def test_simulate_boa_fixed_experts():
    config = small_config(
        learner=LearnerSpec(kind="boa", fixed_experts=[[0.5, -0.3], [0.0, 0.0], [-0.5, 0.5]])
    )
    result = simulate(config)
    bounds = [r.theorem_bound_value for r in result.records]
    assert all(math.isnan(b) for b in bounds[:3])
    assert all(math.isfinite(b) for b in bounds[3:])
    assert set(result.expert_weights) == {"fixed_0", "fixed_1", "fixed_2"}

    config = small_config(learner=LearnerSpec(kind="boa", fixed_experts=[[0.5, -0.3, 0.1]]))
    with pytest.raises(ConfigurationError) as e:
        simulate(config)
    assert "is not a point of K" in str(e)


def test_simulate_order_grid():
    config = small_config(
        learner=LearnerSpec(kind="boa_ons", order_grid=True, max_order=3),
        forecaster=ArConfig(p=1),
    )
    assert ambient_forecaster(config).dim == 3
    result = simulate(config)
    assert set(result.expert_weights) == {"p=1", "p=2", "p=3"}
    assert result.predictions.shape == (60, 3)

    config = small_config(
        learner=LearnerSpec(kind="boa_ons", order_grid=True, max_order=2),
        forecaster=ArchConfig(),
        generator={"kind": "well_specified_arch"},
    )
    assert set(simulate(config).expert_weights) == {"q=1", "q=2"}


def test_build_learner_errors():
    config = small_config(learner=LearnerSpec(kind="comparator"))
    forecaster = build_forecaster(config.forecaster)
    with pytest.raises(ConfigurationError) as e:
        build_learner(config, forecaster)
    assert "the comparator learner needs the comparator point" in str(e)

    with pytest.raises(ConfigurationError):
        build_forecaster(GaussianIidSpec())


def test_ons_gamma_bound_outside_range():
    config = small_config(learner=LearnerSpec(gamma=10.0))
    forecaster = build_forecaster(config.forecaster)
    _, bound = build_learner(config, forecaster)
    assert math.isnan(bound(10))


def test_run_seeds(events):
    config = small_config(seeds=[0, 1, 2], T=40)
    serial = run_seeds(config)
    parallel = run_seeds(config, workers=2)
    assert [r.seed for r in serial] == [0, 1, 2]
    assert [r.seed for r in parallel] == [0, 1, 2]
    for a, b in zip(serial, parallel):
        assert np.array_equal(a.predictions, b.predictions)
    start = of_type(events, Event.ExperimentStart)
    assert start[0] == {"learner": "ons", "family": "ar", "T": 40, "seeds": [0, 1, 2]}


def test_clip_and_clamp_counts():
    config = small_config(
        forecaster=ArchConfig(grad_bound=0.01),
        generator=Garch11Spec(omega=1.0),
    )
    result = simulate(config)
    last = result.records[-1]
    assert result.clip_events > 0
    assert result.clamp_events > 0
    assert last.clip_events == result.clip_events
    assert last.clamp_events == result.clamp_events
    assert [r.clip_events for r in result.records] == sorted(r.clip_events for r in result.records)
