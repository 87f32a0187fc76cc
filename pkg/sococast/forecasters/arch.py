from typing import Optional

import numpy as np

from sococast.core.forecaster import LossGrad
from sococast.forecasters.alpha import default_alpha, grad_bound
from sococast.forecasters.gaussian import GaussianForecaster, MeanVar, lag_matrix, recent_lags, rowdot
from sococast.geometry.sets import PositiveL1
from sococast.schema.forecast import ArchConfig


def arch_features(history: np.ndarray, cfg: ArchConfig) -> np.ndarray:
    """The last q squared observations clipped at sigma_bar2, most recent first."""
    history = np.asarray(history, dtype=float)
    return np.minimum(recent_lags(history**2, cfg.q), cfg.sigma_bar2)


def arch_design(samples: np.ndarray, q: int, sigma_bar2: float) -> np.ndarray:
    squares = np.minimum(np.asarray(samples, dtype=float) ** 2, sigma_bar2)
    return lag_matrix(squares, q)


def arch_variance(x: np.ndarray, sq_features: np.ndarray, cfg: ArchConfig) -> float:
    """c sigma_bar2 / 2 + x^T s, which lies in [c sigma_bar2 / 2, sigma_bar2] on the feasible set."""
    return cfg.variance_floor + float(x @ sq_features)


def qlik_loss_grad(
    x: np.ndarray, sq_features: np.ndarray, y_centered: float, cfg: ArchConfig
) -> LossGrad:
    """QLik loss (log v + y^2 / v) / 2 at v = arch_variance(x) and its gradient."""
    variance = arch_variance(x, sq_features, cfg)
    loss = 0.5 * (np.log(variance) + y_centered**2 / variance)
    grad = 0.5 * (1.0 / variance - y_centered**2 / variance**2) * sq_features
    return LossGrad(float(loss), grad)


class ArchForecaster(GaussianForecaster):
    """ARCH(q) volatility forecaster N(0, v(x)) over {x >= 0, ||x||_1 <= 1 - c/2}."""

    def __init__(
        self,
        cfg: ArchConfig,
        alpha: Optional[float] = None,
        grad_bound_value: Optional[float] = None,
    ) -> None:
        self.cfg = cfg
        super().__init__(
            PositiveL1(radius=cfg.radius, n=cfg.q),
            alpha=alpha if alpha is not None else default_alpha(cfg),
            grad_bound=grad_bound_value if grad_bound_value is not None else grad_bound(cfg),
            warmup=cfg.q,
        )

    def features(self, history: np.ndarray) -> np.ndarray:
        return arch_features(history, self.cfg)

    def design(self, samples: np.ndarray) -> np.ndarray:
        return arch_design(samples, self.cfg.q, self.cfg.sigma_bar2)

    def _loss_grad(self, x: np.ndarray, features: np.ndarray, y: float) -> LossGrad:
        return qlik_loss_grad(x, features, y, self.cfg)

    def _mean_var(self, X: np.ndarray, design: np.ndarray) -> MeanVar:
        return (
            np.zeros(design.shape[0]),
            self.cfg.variance_floor + rowdot(design, X),
            np.zeros_like(design),
            design,
        )
