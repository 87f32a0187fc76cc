from abc import abstractmethod
from typing import Sequence, Tuple

import numpy as np

from sococast.core.forecaster import Forecaster
from sococast.forecasters.kl import gaussian_quadratic_moment
from sococast.schema.forecast import ConditionalLaw, GaussianForecast, law_arrays

MeanVar = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def rowdot(M: np.ndarray, X: np.ndarray) -> np.ndarray:
    return np.einsum("tk,tk->t", M, X)


def lag_matrix(values: np.ndarray, order: int) -> np.ndarray:
    """Row t holds (values[t-1], ..., values[t-order]), zero-padded before the start."""
    T = values.shape[0]
    lags = np.zeros((T, order))
    for i in range(order):
        lags[i + 1 :, i] = values[: T - i - 1]
    return lags


def recent_lags(values: np.ndarray, order: int) -> np.ndarray:
    """The last `order` entries of `values`, most recent first, zero-padded."""
    lags = np.zeros(order)
    recent = values[::-1][:order]
    lags[: recent.shape[0]] = recent
    return lags


class GaussianForecaster(Forecaster):
    """Forecasters whose predictive law is N(mu(x), v(x)) with mu, v affine in x.

    Subclasses provide `_mean_var`, the row-wise mean and variance together
    with their Jacobians in x. The observable loss is (up to a constant in x)
    1/2 (log v + (y - mu)^2 / v), so its directional derivative along u is
    C + A z + B z^2 with z = y - mu; every risk quantity has a closed form.

    Laws enter through their first two moments. For non-Gaussian laws the
    risk differs from the KL divergence by an entropy term that does not depend
    on x, and fourth moments are taken as Gaussian.
    """

    @abstractmethod
    def _mean_var(self, X: np.ndarray, design: np.ndarray) -> MeanVar:
        """Return mu (T,), v (T,), d mu/dx (T, k) and d v/dx (T, k)."""
        raise NotImplementedError

    def forecast(self, x: np.ndarray, features: np.ndarray) -> GaussianForecast:
        mu, var, _, _ = self._mean_var(self._rows(x, 1), features[None, :])
        return GaussianForecast(mean=float(mu[0]), variance=float(var[0]))

    def forecasts(self, X: np.ndarray, design: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        mu, var, _, _ = self._mean_var(X, design)
        return mu, var

    def risks(
        self, X: np.ndarray, design: np.ndarray, laws: Sequence[ConditionalLaw]
    ) -> np.ndarray:
        means, variances = law_arrays(laws)
        mu, var, _, _ = self._mean_var(X, design)
        return 0.5 * (np.log(var / variances) + (variances + (means - mu) ** 2) / var - 1.0)

    def risk_grads(
        self, X: np.ndarray, design: np.ndarray, laws: Sequence[ConditionalLaw]
    ) -> np.ndarray:
        means, variances = law_arrays(laws)
        mu, var, jac_mu, jac_var = self._mean_var(X, design)
        delta = means - mu
        d_mu = -delta / var
        d_var = 0.5 * (1.0 / var - (variances + delta**2) / var**2)
        return jac_mu * d_mu[:, None] + jac_var * d_var[:, None]

    def grad_second_moments(
        self,
        X: np.ndarray,
        U: np.ndarray,
        design: np.ndarray,
        laws: Sequence[ConditionalLaw],
    ) -> np.ndarray:
        means, variances = law_arrays(laws)
        mu, var, jac_mu, jac_var = self._mean_var(X, design)
        a_u = rowdot(jac_mu, U)
        b_u = rowdot(jac_var, U)
        return gaussian_quadratic_moment(
            A=-a_u / var,
            B=-0.5 * b_u / var**2,
            C=0.5 * b_u / var,
            delta=means - mu,
            var=variances,
        )
