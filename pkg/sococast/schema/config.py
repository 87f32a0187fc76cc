from enum import Enum
from typing import List, Literal, Optional, Union

from pydantic import (
    BaseModel,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    field_validator,
    model_validator,
)
from typing_extensions import Annotated

from sococast.schema.forecast import (
    ArchConfig,
    ArConfig,
    CParameter,
    GaussianForecast,
    JointConfig,
    MixtureConfig,
)


class WellSpecifiedARSpec(BaseModel):
    """y_t = coeffs^T (clipped lags) + N(0, noise_var); coeffs in the unit l1-ball."""

    kind: Literal["well_specified_ar"] = "well_specified_ar"
    coeffs: List[float] = [0.5, -0.3]
    noise_var: PositiveFloat = 1.0
    D: PositiveFloat = 2.0

    @field_validator("coeffs")
    @classmethod
    def _in_l1_ball(cls, coeffs: List[float]) -> List[float]:
        if len(coeffs) == 0 or sum(abs(c) for c in coeffs) > 1.0:
            raise ValueError(f"coeffs must be a non-empty point of the unit l1-ball, got: {coeffs}")
        return coeffs

    @property
    def p(self) -> int:
        return len(self.coeffs)


class WellSpecifiedARCHSpec(BaseModel):
    """y_t ~ N(0, c sigma_bar2 / 2 + coeffs^T (clipped squared lags))."""

    kind: Literal["well_specified_arch"] = "well_specified_arch"
    coeffs: List[NonNegativeFloat] = [0.2]
    c: CParameter = 1.5
    sigma_bar2: PositiveFloat = 4.0

    @model_validator(mode="after")
    def _in_positive_ball(self) -> "WellSpecifiedARCHSpec":
        if len(self.coeffs) == 0 or sum(self.coeffs) > 1.0 - self.c / 2.0:
            raise ValueError(
                f"coeffs must be non-empty with sum at most 1 - c/2 = {1.0 - self.c / 2.0}, got: {self.coeffs}"
            )
        return self

    @property
    def q(self) -> int:
        return len(self.coeffs)


class Garch11Spec(BaseModel):
    """GARCH(1,1) variance recursion clamped to [c sigma_bar2 / 2, sigma_bar2]."""

    kind: Literal["garch11"] = "garch11"
    omega: PositiveFloat = 1.0
    a: NonNegativeFloat = 0.1
    b: NonNegativeFloat = 0.6
    c: CParameter = 1.5
    sigma_bar2: PositiveFloat = 4.0


class NonStationaryARSpec(BaseModel):
    """AR coefficients drifting as base + amplitude * sin(2 pi t / period), kept in the l1-ball."""

    kind: Literal["non_stationary_ar"] = "non_stationary_ar"
    base_coeffs: List[float] = [0.3, 0.0]
    amplitude: NonNegativeFloat = 0.5
    period: PositiveFloat = 500.0
    noise_var: PositiveFloat = 1.0
    D: PositiveFloat = 2.0


class MisspecifiedSpec(BaseModel):
    """Deterministic mean and variance schedules outside every parametric family."""

    kind: Literal["misspecified"] = "misspecified"
    mean_amplitude: NonNegativeFloat = 1.0
    mean_period: PositiveFloat = 200.0
    var_low: PositiveFloat = 0.5
    var_high: PositiveFloat = 2.0
    var_period: PositiveFloat = 350.0

    @model_validator(mode="after")
    def _ordered(self) -> "MisspecifiedSpec":
        if self.var_low > self.var_high:
            raise ValueError("var_low must not exceed var_high")
        return self


class GaussianIidSpec(BaseModel):
    kind: Literal["gaussian_iid"] = "gaussian_iid"
    mean: float = 0.0
    variance: PositiveFloat = 1.0


class WellSpecifiedJointSpec(BaseModel):
    """Mean from clipped AR lags and variance from clipped squared lags."""

    kind: Literal["well_specified_joint"] = "well_specified_joint"
    mean_coeffs: List[float] = [0.5]
    var_coeffs: List[NonNegativeFloat] = [0.2]
    D: PositiveFloat = 0.5
    c: CParameter = 1.5
    sigma_bar2: PositiveFloat = 4.0

    @model_validator(mode="after")
    def _feasible(self) -> "WellSpecifiedJointSpec":
        if len(self.mean_coeffs) == 0 or sum(abs(c) for c in self.mean_coeffs) > 1.0:
            raise ValueError("mean_coeffs must be a non-empty point of the unit l1-ball")
        if len(self.var_coeffs) == 0 or sum(self.var_coeffs) > 1.0 - self.c / 2.0:
            raise ValueError("var_coeffs must be non-empty with sum at most 1 - c/2")
        return self


class MixtureTruthSpec(BaseModel):
    """The law cycles through the listed components, `segment` rounds each."""

    kind: Literal["mixture_truth"] = "mixture_truth"
    components: List[GaussianForecast]
    cycle: List[NonNegativeInt] = [0]
    segment: PositiveInt = 1000

    @model_validator(mode="after")
    def _indices(self) -> "MixtureTruthSpec":
        if len(self.cycle) == 0 or max(self.cycle) >= len(self.components):
            raise ValueError("cycle must index into components")
        return self


GeneratorSpec = Annotated[
    Union[
        WellSpecifiedARSpec,
        WellSpecifiedARCHSpec,
        Garch11Spec,
        NonStationaryARSpec,
        MisspecifiedSpec,
        GaussianIidSpec,
        WellSpecifiedJointSpec,
        MixtureTruthSpec,
    ],
    Field(discriminator="kind"),
]

ForecasterSpec = Annotated[
    Union[ArConfig, ArchConfig, JointConfig, MixtureConfig],
    Field(discriminator="family"),
]


class LearnerKind(str, Enum):
    """The available learners."""

    ons = "ons"
    boa = "boa"
    boa_ons = "boa_ons"
    comparator = "comparator"


class LearnerSpec(BaseModel):
    """The learner of an experiment.

    Attributes
    ----------
    - `kind` (`LearnerKind`): ONS, BOA over fixed experts, BOA-ONS, or oracle replay of the comparator.
    - `gamma` (float, optional): ONS step parameter. Defaults to alpha/2.
    - `alpha` (float, optional): Overrides the family's exp-concavity constant.
    - `gamma_grid_size` (int, optional): Size K of the (2^-1, ..., 2^-K) grid of BOA-ONS. Defaults to max(d, 20) when no order grid is used.
    - `order_grid` (bool): BOA-ONS over model orders 1..max_order instead of step parameters.
    - `max_order` (int, optional): Largest order of the grid. Defaults to ceil(log T).
    - `refresh_period` (int): Rounds between direct inverse recomputations.
    - `fixed_experts` (List[List[float]]): Points aggregated by the BOA learner.
    - `weights_snapshot` (bool): Store aggregation weights in every record.
    """

    kind: LearnerKind = LearnerKind.ons
    gamma: Optional[PositiveFloat] = None
    alpha: Optional[PositiveFloat] = None
    gamma_grid_size: Optional[PositiveInt] = None
    order_grid: bool = False
    max_order: Optional[PositiveInt] = None
    refresh_period: PositiveInt = 1000
    fixed_experts: List[List[float]] = []
    weights_snapshot: bool = True

    @model_validator(mode="after")
    def _check_kind(self) -> "LearnerSpec":
        if self.kind == LearnerKind.boa and len(self.fixed_experts) == 0:
            raise ValueError("the boa learner needs at least one fixed expert")
        return self


class OutputSpec(BaseModel):
    directory: str = "results"
    svg: bool = True
    events_db: bool = True


class ExperimentConfig(BaseModel):
    """A complete experiment: learner, forecaster family, data generator and outputs.

    Attributes
    ----------
    - `T` (int): Number of rounds.
    - `seeds` (List[int]): One independent run per seed.
    - `delta` (float): Confidence parameter of the reported bounds, in (0, 1).
    """

    learner: LearnerSpec = LearnerSpec()
    forecaster: ForecasterSpec = ArConfig()
    generator: GeneratorSpec = WellSpecifiedARSpec()
    T: PositiveInt = 2000
    seeds: List[int] = [0, 1, 2]
    delta: float = 0.05
    output: OutputSpec = OutputSpec()

    @field_validator("delta")
    @classmethod
    def _delta_in_unit_interval(cls, delta: float) -> float:
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got: {delta}")
        return delta

    @field_validator("seeds")
    @classmethod
    def _seeds_non_empty(cls, seeds: List[int]) -> List[int]:
        if len(seeds) == 0 or len(set(seeds)) != len(seeds):
            raise ValueError("seeds must be non-empty and distinct")
        return seeds

    @model_validator(mode="after")
    def _check_learner(self) -> "ExperimentConfig":
        if self.learner.order_grid and isinstance(self.forecaster, MixtureConfig):
            raise ValueError("order grids apply to the ar, arch and joint families only")
        if self.learner.order_grid and self.T < 2:
            raise ValueError("order grids need T >= 2")
        return self


class RegretRecord(BaseModel):
    """One round of a simulated run.

    Attributes
    ----------
    - `t` (int): Round index, starting at 1.
    - `inst_risk` (float): KL(P_t, forecast of x_t).
    - `cum_risk` (float): Prefix sum of `inst_risk`.
    - `comparator_cum_risk` (float): Prefix sum of the comparator's risk.
    - `regret` (float): `cum_risk - comparator_cum_risk`.
    - `theorem_bound_value` (float): The learner's high-probability bound at horizon t (NaN when out of scope).
    - `clip_events` (int): Clipped gradients so far.
    - `clamp_events` (int): Clamped losses, densities and truth variances so far.
    - `weights_snapshot` (List[float], optional): Aggregation weights, for aggregating learners.
    """

    t: int
    inst_risk: float
    cum_risk: float
    comparator_cum_risk: float
    regret: float
    theorem_bound_value: float
    clip_events: int
    clamp_events: int = 0
    weights_snapshot: Optional[List[float]] = None
