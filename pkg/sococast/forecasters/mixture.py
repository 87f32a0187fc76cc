import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from sococast.core.forecaster import Forecaster, LossGrad
from sococast.forecasters.alpha import default_alpha, grad_bound
from sococast.forecasters.kl import (
    component_arrays,
    component_log_densities,
    hermite_rule,
    kl_mixture,
    law_expectation,
)
from sococast.geometry.sets import Simplex
from sococast.schema.forecast import (
    ConditionalLaw,
    GaussianForecast,
    MixtureConfig,
    MixtureForecast,
    LawPath,
    as_law_path,
    gaussian_mask,
    law_arrays,
)
from sococast.schema.pubsub import Event
from sococast.utils.exceptions import ContractError
from sococast.utils.pubsub import publish_event


def localized_gaussian_grid(
    D: float, c: float, sigma_bar2: float, K1: int, K2: int, K3: int
) -> List[GaussianForecast]:
    """Gaussian components localized on mean and variance bands.

    Mean bands are [jD + D/sqrt(2), (j+1)D + D/sqrt(2)] for -K1 <= j <= K2 and
    variance bands [(c/2)^(l+1) sigma_bar2 / 2, (c/2)^l sigma_bar2] for
    0 <= l <= K3. Each component sits at the band centre (geometric centre for
    the variance), j-major order.
    """
    components = []
    for j in range(-K1, K2 + 1):
        mean = (j + 0.5) * D + D / math.sqrt(2.0)
        for level in range(K3 + 1):
            low = (c / 2.0) ** (level + 1) * sigma_bar2 / 2.0
            high = (c / 2.0) ** level * sigma_bar2
            components.append(GaussianForecast(mean=mean, variance=math.sqrt(low * high)))
    return components


def mixture_components(cfg: MixtureConfig) -> List[GaussianForecast]:
    if cfg.components is not None:
        return list(cfg.components)
    return localized_gaussian_grid(cfg.D, cfg.c, cfg.sigma_bar2, cfg.K1, cfg.K2, cfg.K3)


def component_densities(y: float, components: Sequence[GaussianForecast]) -> np.ndarray:
    means, sds = component_arrays(components)
    return stats.norm.pdf(y, loc=means, scale=sds)


def mixture_loss_grad(
    x: np.ndarray, densities_at_y: np.ndarray, cfg: MixtureConfig
) -> LossGrad:
    """Logarithmic score -log(x^T d) with densities clamped to [m, M], and its gradient.

    Raises
    ------
    - `ContractError`: If x^T d is not positive.
    """
    d = np.clip(densities_at_y, cfg.m, cfg.M)
    mass = float(x @ d)
    if mass <= 0.0:
        raise ContractError(f"Var: x^T d should be positive, got: {mass}")
    return LossGrad(-math.log(mass), -d / mass)


class MixtureForecaster(Forecaster):
    """Convex aggregation of fixed Gaussian component forecasts under the logarithmic score.

    Risks are KL divergences from the law to the unclamped mixture. Gaussian
    laws are integrated with a Gauss-Hermite rule vectorized over rounds, other
    densities with adaptive quadrature.
    """

    def __init__(
        self,
        cfg: MixtureConfig,
        alpha: Optional[float] = None,
        grad_bound_value: Optional[float] = None,
    ) -> None:
        self.cfg = cfg
        self.components = mixture_components(cfg)
        self.clamp_count = 0
        super().__init__(
            Simplex(n=len(self.components)),
            alpha=alpha if alpha is not None else default_alpha(cfg),
            grad_bound=grad_bound_value if grad_bound_value is not None else grad_bound(cfg),
            warmup=0,
        )

    def features(self, history: np.ndarray) -> np.ndarray:
        return np.zeros(0)

    def design(self, samples: np.ndarray) -> np.ndarray:
        return np.zeros((np.asarray(samples).shape[0], 0))

    def _loss_grad(self, x: np.ndarray, features: np.ndarray, y: float) -> LossGrad:
        densities = component_densities(y, self.components)
        outside = (densities < self.cfg.m) | (densities > self.cfg.M)
        if np.any(outside):
            self.clamp_count += 1
            if self.clamp_count == 1:
                publish_event(
                    Event.ClampEvent,
                    id(self),
                    {"what": "component density", "t": None, "value": densities.tolist()},
                )
        return mixture_loss_grad(x, densities, self.cfg)

    def forecast(self, x: np.ndarray, features: np.ndarray) -> MixtureForecast:
        return MixtureForecast(weights=[float(w) for w in x], components=self.components)

    def _gaussian_nodes(self, laws: Sequence[ConditionalLaw]) -> np.ndarray:
        means, variances = law_arrays(laws)
        nodes, _ = hermite_rule()
        return means[:, None] + np.sqrt(variances)[:, None] * nodes[None, :]

    def _split(self, laws: Sequence[ConditionalLaw]):
        gaussian = gaussian_mask(laws)
        return gaussian, np.nonzero(~gaussian)[0]

    def risks(
        self, X: np.ndarray, design: np.ndarray, laws: Sequence[ConditionalLaw]
    ) -> np.ndarray:
        laws = as_law_path(laws)
        out = np.empty(len(laws))
        gaussian, others = self._split(laws)
        if np.any(gaussian):
            rows = laws[np.nonzero(gaussian)[0]]
            _, variances = law_arrays(rows)
            log_phi = component_log_densities(self._gaussian_nodes(rows), self.components)
            log_mix = logsumexp(log_phi, b=X[gaussian][:, None, :], axis=-1)
            _, weights = hermite_rule()
            entropy = 0.5 * np.log(2.0 * math.pi * math.e * variances)
            out[gaussian] = -entropy - log_mix @ weights
        for i in others:
            out[i] = kl_mixture(laws[i], X[i], self.components)
        return out

    def _ratio_moments(
        self, X: np.ndarray, laws: Sequence[ConditionalLaw], U: Optional[np.ndarray]
    ) -> np.ndarray:
        # E[phi / x^T phi] when U is None, otherwise E[(phi^T u / x^T phi)^2]
        laws = as_law_path(laws)
        K = len(self.components)
        out = np.empty((len(laws), K) if U is None else len(laws))
        gaussian, others = self._split(laws)
        _, weights = hermite_rule()
        if np.any(gaussian):
            rows = laws[np.nonzero(gaussian)[0]]
            log_phi = component_log_densities(self._gaussian_nodes(rows), self.components)
            log_mix = logsumexp(log_phi, b=X[gaussian][:, None, :], axis=-1)
            ratio = np.exp(log_phi - log_mix[..., None])
            if U is None:
                out[gaussian] = np.einsum("tnk,n->tk", ratio, weights)
            else:
                directional = np.einsum("tnk,tk->tn", ratio, U[gaussian])
                out[gaussian] = directional**2 @ weights
        for i in others:
            x = X[i]
            u = None if U is None else U[i]

            def func(y: np.ndarray, x=x, u=u) -> np.ndarray:
                phi = np.exp(component_log_densities(y, self.components))
                ratio = phi / (phi @ x)[:, None]
                return ratio if u is None else (ratio @ u) ** 2

            out[i] = law_expectation(laws[i], func, self.components)
        return out

    def risk_grads(
        self, X: np.ndarray, design: np.ndarray, laws: Sequence[ConditionalLaw]
    ) -> np.ndarray:
        return -self._ratio_moments(X, laws, None)

    def grad_second_moments(
        self,
        X: np.ndarray,
        U: np.ndarray,
        design: np.ndarray,
        laws: Sequence[ConditionalLaw],
    ) -> np.ndarray:
        return self._ratio_moments(X, laws, U)

    def _distinct(self, laws: Sequence[ConditionalLaw]) -> Optional[Tuple[LawPath, np.ndarray]]:
        """Distinct laws and their multiplicities, when every law is Gaussian."""
        laws = as_law_path(laws)
        if not np.all(laws.gaussian):
            return None
        moments = np.column_stack([laws.means, laws.variances])
        _, index, counts = np.unique(moments, axis=0, return_index=True, return_counts=True)
        return laws[index], counts

    def cumulative_risk(
        self, x: np.ndarray, design: np.ndarray, laws: Sequence[ConditionalLaw]
    ) -> float:
        distinct = self._distinct(laws)
        if distinct is None:
            return super().cumulative_risk(x, design, laws)
        rows, counts = distinct
        risks = self.risks(self._rows(x, len(rows)), self.design(np.zeros(len(rows))), rows)
        return float(counts @ risks)

    def cumulative_risk_grad(
        self, x: np.ndarray, design: np.ndarray, laws: Sequence[ConditionalLaw]
    ) -> np.ndarray:
        distinct = self._distinct(laws)
        if distinct is None:
            return super().cumulative_risk_grad(x, design, laws)
        rows, counts = distinct
        return counts @ self.risk_grads(self._rows(x, len(rows)), self.design(np.zeros(len(rows))), rows)

    def h2_margins(
        self,
        at: np.ndarray,
        other: np.ndarray,
        design: np.ndarray,
        laws: Sequence[ConditionalLaw],
        alpha: float,
        moment: str = "conditional",
    ) -> np.ndarray:
        """(H2) margins of the clamped logarithmic score.

        With r = (b - a)^T d / a^T d the margin integrand is
        log(1 + r) - r + alpha/2 r^2, integrated against each law. With
        `moment="risk"` the generic computation on unclamped risks is used.
        """
        if moment != "conditional":
            return super().h2_margins(at, other, design, laws, alpha, moment)
        out = np.empty(len(laws))
        for i, law in enumerate(laws):
            a, b = at[i], other[i]
            if np.array_equal(a, b):
                out[i] = 0.0
                continue

            def func(y: np.ndarray, a=a, b=b) -> np.ndarray:
                d = np.clip(
                    np.exp(component_log_densities(y, self.components)),
                    self.cfg.m,
                    self.cfg.M,
                )
                r = (d @ (b - a)) / (d @ a)
                return np.log1p(r) - r + 0.5 * alpha * r**2

            out[i] = float(law_expectation(law, func, self.components))
        return out
