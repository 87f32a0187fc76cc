import math
from collections import abc
from typing import Callable, List, Literal, Optional, Sequence, Tuple

import numpy as np

from pydantic import (
    AfterValidator,
    BaseModel,
    ConfigDict,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    model_validator,
)
from typing_extensions import Annotated


class GaussianForecast(BaseModel):
    """A Gaussian predictive distribution.

    Attributes
    ----------
    - `mean` (float): The forecast mean.
    - `variance` (float): The forecast variance (positive).
    """

    model_config = ConfigDict(frozen=True)

    mean: float
    variance: PositiveFloat


class MixtureForecast(BaseModel):
    """A convex combination of Gaussian component forecasts.

    Attributes
    ----------
    - `weights` (List[float]): Mixture weights, a point of the simplex.
    - `components` (List[`GaussianForecast`]): The component forecasters.
    """

    model_config = ConfigDict(frozen=True)

    weights: List[float]
    components: List[GaussianForecast]


class ConditionalLaw(BaseModel):
    """The conditional law of the next observation given the past.

    Attributes
    ----------
    - `mean` (float): The conditional mean m_t.
    - `variance` (float): The conditional variance sigma_t^2.
    - `density` (Callable, optional): A vectorized density p_t. When absent the law is Gaussian N(mean, variance).
    """

    model_config = ConfigDict(frozen=True)

    mean: float
    variance: PositiveFloat
    density: Optional[Callable] = None

    @property
    def is_gaussian(self) -> bool:
        return self.density is None


class ArConfig(BaseModel):
    """Parameters of the AR(p) mean forecaster with fixed variance.

    Attributes
    ----------
    - `p` (int): The order. The feasible set is the unit l1-ball of dimension p.
    - `D` (float): Lags are clipped to [-D/sqrt(2), D/sqrt(2)].
    - `sigma2` (float): The fixed forecast variance. Defaults to 1.
    - `noise_scale` (float): Noise standard deviation used by the gradient envelope. Defaults to 1.
    - `grad_bound` (float, optional): Overrides the gradient envelope G.
    """

    family: Literal["ar"] = "ar"
    p: PositiveInt = 2
    D: PositiveFloat = 2.0
    sigma2: PositiveFloat = 1.0
    noise_scale: PositiveFloat = 1.0
    grad_bound: Optional[PositiveFloat] = None


def _check_c(c: float) -> float:
    if not 1.0 < c < 2.0:
        raise ValueError(f"c must lie in (1, 2), got: {c}")
    return c


CParameter = Annotated[float, AfterValidator(_check_c)]


class ArchConfig(BaseModel):
    """Parameters of the ARCH(q) variance forecaster.

    The feasible set is {x >= 0, ||x||_1 <= 1 - c/2} so every produced
    variance lies in [c*sigma_bar2/2, sigma_bar2].
    """

    family: Literal["arch"] = "arch"
    q: PositiveInt = 1
    c: CParameter = 1.5
    sigma_bar2: PositiveFloat = 4.0
    grad_bound: Optional[PositiveFloat] = None

    @property
    def variance_floor(self) -> float:
        return self.c * self.sigma_bar2 / 2.0

    @property
    def radius(self) -> float:
        return 1.0 - self.c / 2.0


class JointConfig(BaseModel):
    """Parameters of the joint Gaussian forecaster (AR(p) mean, ARCH(q) variance)."""

    family: Literal["joint"] = "joint"
    p: PositiveInt = 1
    q: PositiveInt = 1
    D: PositiveFloat = 0.5
    c: CParameter = 1.5
    sigma_bar2: PositiveFloat = 4.0
    noise_scale: PositiveFloat = 1.0
    grad_bound: Optional[PositiveFloat] = None

    @model_validator(mode="after")
    def _check_joint_condition(self) -> "JointConfig":
        limit = (self.c - 1.0) * self.sigma_bar2 / 2.0
        if not self.D**2 < limit:
            raise ValueError(
                f"the joint forecaster requires D^2 < (c-1)*sigma_bar2/2, got: {self.D**2} >= {limit}"
            )
        return self

    @property
    def variance_floor(self) -> float:
        return self.c * self.sigma_bar2 / 2.0

    @property
    def radius(self) -> float:
        return 1.0 - self.c / 2.0

    def ar_config(self) -> ArConfig:
        return ArConfig(p=self.p, D=self.D, noise_scale=self.noise_scale)

    def arch_config(self) -> ArchConfig:
        return ArchConfig(q=self.q, c=self.c, sigma_bar2=self.sigma_bar2)


class MixtureConfig(BaseModel):
    """Parameters of the mixture forecaster over K fixed Gaussian components.

    When `components` is not given the localized Gaussian grid is used:
    mean bands indexed by -K1 <= j <= K2 and variance bands by 0 <= l <= K3.

    Attributes
    ----------
    - `m` (float): Lower bound enforced on component densities.
    - `M` (float): Upper bound enforced on component densities.
    - `components` (List[`GaussianForecast`], optional): Explicit components.
    """

    family: Literal["mixture"] = "mixture"
    m: PositiveFloat = 0.01
    M: PositiveFloat = 0.3
    components: Optional[List[GaussianForecast]] = None
    D: PositiveFloat = 1.0
    c: CParameter = 1.5
    sigma_bar2: PositiveFloat = 4.0
    K1: NonNegativeInt = 1
    K2: NonNegativeInt = 0
    K3: NonNegativeInt = 1
    grad_bound: Optional[PositiveFloat] = None

    @model_validator(mode="after")
    def _check_bounds(self) -> "MixtureConfig":
        if self.m > self.M:
            raise ValueError(f"m must not exceed M, got: m={self.m}, M={self.M}")
        if self.components is not None and len(self.components) == 0:
            raise ValueError("components must not be empty")
        return self

    @property
    def K(self) -> int:
        if self.components is not None:
            return len(self.components)
        return (self.K1 + self.K2 + 1) * (self.K3 + 1)

    @property
    def exact_grad_bound(self) -> float:
        return math.sqrt(self.K) * self.M / self.m


class LawPath(abc.Sequence):
    """A sequence of conditional laws with cached moment arrays.

    Indexing with an integer returns a `ConditionalLaw`; slices and index
    arrays return a `LawPath`.
    """

    def __init__(self, laws: Sequence[ConditionalLaw]) -> None:
        self._laws = list(laws)
        self.means = np.array([law.mean for law in self._laws], dtype=float)
        self.variances = np.array([law.variance for law in self._laws], dtype=float)
        self.gaussian = np.array([law.is_gaussian for law in self._laws], dtype=bool)

    def __len__(self) -> int:
        return len(self._laws)

    def __getitem__(self, index):
        if isinstance(index, (int, np.integer)):
            return self._laws[index]
        if isinstance(index, slice):
            return LawPath(self._laws[index])
        return LawPath([self._laws[i] for i in np.asarray(index).ravel()])


def law_arrays(laws: Sequence[ConditionalLaw]) -> Tuple[np.ndarray, np.ndarray]:
    """The means and variances of a law sequence as two arrays."""
    if isinstance(laws, LawPath):
        return laws.means, laws.variances
    means = np.array([law.mean for law in laws], dtype=float)
    variances = np.array([law.variance for law in laws], dtype=float)
    return means, variances


def gaussian_mask(laws: Sequence[ConditionalLaw]) -> np.ndarray:
    if isinstance(laws, LawPath):
        return laws.gaussian
    return np.array([law.is_gaussian for law in laws], dtype=bool)


def as_law_path(laws: Sequence[ConditionalLaw]) -> LawPath:
    return laws if isinstance(laws, LawPath) else LawPath(laws)
