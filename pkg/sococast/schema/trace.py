from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class OnsTrace(BaseModel):
    """Per-round iterates and (clipped) gradients fed to an ONS learner.

    Attributes
    ----------
    - `gamma` (float): The ONS step parameter.
    - `grad_bound` (float): The clipping bound G.
    - `diameter` (float): The diameter D of the feasible set.
    - `iterates` (List[np.ndarray]): x_t, the prediction at round t.
    - `grads` (List[np.ndarray]): g_t, the gradient received at round t.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    gamma: float
    grad_bound: float
    diameter: float
    iterates: List[np.ndarray] = Field(default_factory=list)
    grads: List[np.ndarray] = Field(default_factory=list)

    @property
    def dim(self) -> int:
        return int(self.iterates[0].shape[0]) if self.iterates else 0

    def arrays(self):
        return np.array(self.iterates), np.array(self.grads)


class BoaTrace(BaseModel):
    """Per-round weights and (clamped) loss vectors fed to a BOA learner."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    prior: np.ndarray
    range_bound: float
    weights: List[np.ndarray] = Field(default_factory=list)
    losses: List[np.ndarray] = Field(default_factory=list)

    def arrays(self):
        return np.array(self.weights), np.array(self.losses)


class PathwiseReport(BaseModel):
    """Outcome of checking a deterministic regret inequality along a trace.

    Attributes
    ----------
    - `kind` (str): "ons" or "boa".
    - `checked` (int): Number of (prefix, comparator) pairs evaluated.
    - `violations` (int): Number of pairs where the inequality failed.
    - `worst_slack` (float): Smallest value of bound minus left-hand side.
    """

    kind: str
    checked: int
    violations: int
    worst_slack: float


class H2Report(BaseModel):
    n_pairs: int
    violations: int
    worst_margin: float
    alpha: float
    moment: str


class QuantileReport(BaseModel):
    exceedance: float
    threshold: float
    passed: bool


class SurrogateDecompositionRecord(BaseModel):
    """Regret decomposition along one ONS run against a fixed comparator.

    `expected_bound` is the right-hand side implied by exp-concavity; `slack`
    is `expected_bound - regret` and is non-negative whenever (H2) holds along
    the path.
    """

    t: int
    regret: float
    linear: float
    quadratic: float
    conditional: float
    expected_bound: float
    slack: float


class SuiteResult(BaseModel):
    suite: str
    passed: bool
    worst_margin: float
    details: str = ""
    sub_results: Optional[List["SuiteResult"]] = None
