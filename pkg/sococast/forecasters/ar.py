import math
from typing import Optional

import numpy as np

from sococast.core.forecaster import LossGrad
from sococast.forecasters.alpha import default_alpha, grad_bound
from sococast.forecasters.gaussian import GaussianForecaster, MeanVar, lag_matrix, recent_lags, rowdot
from sococast.geometry.sets import L1Ball
from sococast.schema.forecast import ArConfig


def ar_clip(values: np.ndarray, D: float) -> np.ndarray:
    bound = D / math.sqrt(2.0)
    return np.clip(values, -bound, bound)


def ar_features(history: np.ndarray, cfg: ArConfig) -> np.ndarray:
    """The last p observations clipped to [-D/sqrt(2), D/sqrt(2)], most recent first."""
    return ar_clip(recent_lags(np.asarray(history, dtype=float), cfg.p), cfg.D)


def ar_design(samples: np.ndarray, p: int, D: float) -> np.ndarray:
    return lag_matrix(ar_clip(np.asarray(samples, dtype=float), D), p)


def ar_loss_grad(x: np.ndarray, features: np.ndarray, y: float, cfg: ArConfig) -> LossGrad:
    """Squared residual (x^T f - y)^2 / (2 sigma^2) and its gradient."""
    residual = float(x @ features) - y
    return LossGrad(residual**2 / (2.0 * cfg.sigma2), (residual / cfg.sigma2) * features)


class ArForecaster(GaussianForecaster):
    """AR(p) mean forecaster N(x^T f_t, sigma^2) over the unit l1-ball."""

    def __init__(
        self,
        cfg: ArConfig,
        alpha: Optional[float] = None,
        grad_bound_value: Optional[float] = None,
    ) -> None:
        self.cfg = cfg
        super().__init__(
            L1Ball(n=cfg.p),
            alpha=alpha if alpha is not None else default_alpha(cfg),
            grad_bound=grad_bound_value if grad_bound_value is not None else grad_bound(cfg),
            warmup=cfg.p,
        )

    def features(self, history: np.ndarray) -> np.ndarray:
        return ar_features(history, self.cfg)

    def design(self, samples: np.ndarray) -> np.ndarray:
        return ar_design(samples, self.cfg.p, self.cfg.D)

    def _loss_grad(self, x: np.ndarray, features: np.ndarray, y: float) -> LossGrad:
        return ar_loss_grad(x, features, y, self.cfg)

    def _mean_var(self, X: np.ndarray, design: np.ndarray) -> MeanVar:
        T = design.shape[0]
        return (
            rowdot(design, X),
            np.full(T, self.cfg.sigma2),
            design,
            np.zeros_like(design),
        )
