import pytest
from pydantic import TypeAdapter, ValidationError
from sococast.schema.config import (
    ExperimentConfig,
    Garch11Spec,
    GeneratorSpec,
    LearnerKind,
    LearnerSpec,
    MisspecifiedSpec,
    MixtureTruthSpec,
    WellSpecifiedARCHSpec,
    WellSpecifiedARSpec,
    WellSpecifiedJointSpec,
)
from sococast.schema.forecast import ArchConfig, ArConfig, GaussianForecast, JointConfig, MixtureConfig


def test_experiment_defaults():
    cfg = ExperimentConfig()
    assert cfg.learner.kind == LearnerKind.ons
    assert isinstance(cfg.forecaster, ArConfig)
    assert isinstance(cfg.generator, WellSpecifiedARSpec)
    assert cfg.T == 2000
    assert cfg.seeds == [0, 1, 2]
    assert cfg.delta == 0.05
    assert cfg.output.directory == "results"


def test_discriminated_unions():
    cfg = ExperimentConfig.model_validate(
        {
            "learner": {"kind": "boa_ons", "gamma_grid_size": 8},
            "forecaster": {"family": "arch", "q": 2},
            "generator": {"kind": "garch11", "a": 0.2},
        }
    )
    assert cfg.learner.kind == LearnerKind.boa_ons
    assert isinstance(cfg.forecaster, ArchConfig)
    assert cfg.forecaster.q == 2
    assert isinstance(cfg.generator, Garch11Spec)
    assert cfg.generator.a == 0.2

    cfg = ExperimentConfig.model_validate({"forecaster": {"family": "joint"}})
    assert isinstance(cfg.forecaster, JointConfig)

    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate({"forecaster": {"family": "quantile"}})

    with pytest.raises(ValidationError):
        TypeAdapter(GeneratorSpec).validate_python({"kind": "random_walk"})


def test_experiment_validation():
    with pytest.raises(ValidationError) as e:
        ExperimentConfig(delta=1.0)
    assert "delta must lie in (0, 1)" in str(e)

    with pytest.raises(ValidationError) as e:
        ExperimentConfig(seeds=[])
    assert "seeds must be non-empty and distinct" in str(e)

    with pytest.raises(ValidationError):
        ExperimentConfig(seeds=[1, 1])

    with pytest.raises(ValidationError):
        ExperimentConfig(T=0)

    with pytest.raises(ValidationError) as e:
        ExperimentConfig(learner=LearnerSpec(kind="boa_ons", order_grid=True), forecaster=MixtureConfig())
    assert "order grids apply to the ar, arch and joint families only" in str(e)

    with pytest.raises(ValidationError) as e:
        ExperimentConfig(learner=LearnerSpec(kind="boa_ons", order_grid=True), T=1)
    assert "order grids need T >= 2" in str(e)


def test_learner_spec():
    with pytest.raises(ValidationError) as e:
        LearnerSpec(kind="boa")
    assert "the boa learner needs at least one fixed expert" in str(e)

    spec = LearnerSpec(kind="boa", fixed_experts=[[0.1, 0.2], [0.0, 0.0]])
    assert len(spec.fixed_experts) == 2
    assert spec.refresh_period == 1000
    assert spec.weights_snapshot


def test_generator_specs():
    assert WellSpecifiedARSpec().p == 2
    assert WellSpecifiedARCHSpec(coeffs=[0.1, 0.1]).q == 2

    with pytest.raises(ValidationError):
        WellSpecifiedARSpec(coeffs=[0.8, 0.4])
    with pytest.raises(ValidationError):
        WellSpecifiedARSpec(coeffs=[])
    with pytest.raises(ValidationError):
        WellSpecifiedARCHSpec(coeffs=[0.3])
    with pytest.raises(ValidationError):
        WellSpecifiedARCHSpec(coeffs=[0.1], c=2.5)
    with pytest.raises(ValidationError):
        WellSpecifiedJointSpec(var_coeffs=[0.5])
    with pytest.raises(ValidationError):
        MisspecifiedSpec(var_low=3.0, var_high=1.0)

    components = [GaussianForecast(mean=0.0, variance=1.0), GaussianForecast(mean=1.0, variance=2.0)]
    assert MixtureTruthSpec(components=components, cycle=[0, 1]).segment == 1000
    with pytest.raises(ValidationError) as e:
        MixtureTruthSpec(components=components, cycle=[2])
    assert "cycle must index into components" in str(e)
