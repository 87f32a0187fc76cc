import math
from typing import Optional

import numpy as np

from sococast.core.forecaster import LossGrad
from sococast.forecasters.alpha import default_alpha, grad_bound
from sococast.forecasters.ar import ar_design, ar_features
from sococast.forecasters.arch import arch_design, arch_features
from sococast.forecasters.gaussian import GaussianForecaster, MeanVar, rowdot
from sococast.geometry.sets import L1Ball, PositiveL1, Product
from sococast.schema.forecast import JointConfig


def joint_feasible_set(cfg: JointConfig) -> Product:
    return Product(parts=[L1Ball(n=cfg.p), PositiveL1(radius=cfg.radius, n=cfg.q)])


def joint_gaussian_loss_grad(
    x: np.ndarray,
    ar_feats: np.ndarray,
    sq_feats: np.ndarray,
    y: float,
    cfg: JointConfig,
) -> LossGrad:
    """Negative log density of N(a^T f, c sigma_bar2 / 2 + b^T s) at y, with x = (a, b)."""
    a, b = x[: cfg.p], x[cfg.p :]
    mean = float(a @ ar_feats)
    variance = cfg.variance_floor + float(b @ sq_feats)
    residual = y - mean
    loss = 0.5 * (math.log(2.0 * math.pi * variance) + residual**2 / variance)
    grad = np.concatenate(
        [
            -(residual / variance) * ar_feats,
            0.5 * (1.0 / variance - residual**2 / variance**2) * sq_feats,
        ]
    )
    return LossGrad(loss, grad)


class JointGaussianForecaster(GaussianForecaster):
    """Joint mean and volatility forecaster; features are the AR lags followed by the squared lags."""

    def __init__(
        self,
        cfg: JointConfig,
        alpha: Optional[float] = None,
        grad_bound_value: Optional[float] = None,
    ) -> None:
        self.cfg = cfg
        self._ar = cfg.ar_config()
        self._arch = cfg.arch_config()
        super().__init__(
            joint_feasible_set(cfg),
            alpha=alpha if alpha is not None else default_alpha(cfg),
            grad_bound=grad_bound_value if grad_bound_value is not None else grad_bound(cfg),
            warmup=max(cfg.p, cfg.q),
        )

    def features(self, history: np.ndarray) -> np.ndarray:
        return np.concatenate(
            [ar_features(history, self._ar), arch_features(history, self._arch)]
        )

    def design(self, samples: np.ndarray) -> np.ndarray:
        return np.hstack(
            [
                ar_design(samples, self.cfg.p, self.cfg.D),
                arch_design(samples, self.cfg.q, self.cfg.sigma_bar2),
            ]
        )

    def _loss_grad(self, x: np.ndarray, features: np.ndarray, y: float) -> LossGrad:
        p = self.cfg.p
        return joint_gaussian_loss_grad(x, features[:p], features[p:], y, self.cfg)

    def _mean_var(self, X: np.ndarray, design: np.ndarray) -> MeanVar:
        p = self.cfg.p
        jac_mu = np.zeros_like(design)
        jac_mu[:, :p] = design[:, :p]
        jac_var = np.zeros_like(design)
        jac_var[:, p:] = design[:, p:]
        return (
            rowdot(jac_mu, X),
            self.cfg.variance_floor + rowdot(jac_var, X),
            jac_mu,
            jac_var,
        )
