"""Stochastic exp-concavity constants and gradient bounds of the forecaster families."""
import math
from enum import Enum
from typing import Union

from sococast.schema.forecast import ArchConfig, ArConfig, JointConfig, MixtureConfig
from sococast.utils.exceptions import ConfigurationError
from sococast.utils.typechecking import check_positive

# residual envelope, in noise standard deviations
ENVELOPE_Z = 4.0

ForecasterConfig = Union[ArConfig, ArchConfig, JointConfig, MixtureConfig]


class AlphaSetting(str, Enum):
    """The settings with a known exp-concavity constant."""

    ArMean = "ar_mean"
    Variance = "variance"
    Joint = "joint"
    Mixture = "mixture"


def _require(params: dict, *names: str) -> None:
    missing = [name for name in names if name not in params]
    if missing:
        raise ConfigurationError(f"alpha_constant missing parameters: {missing}")


def alpha_constant(setting: AlphaSetting, **params: float) -> float:
    """The exp-concavity constant alpha of the risk of a forecaster family.

    Parameters
    ----------
    - `setting` (`AlphaSetting`): The family.
    - `**params` : ArMean needs `sigma2`, `D`; Variance needs `c`; Joint needs `c`, `sigma_bar2`, `D`;
      Mixture needs `G` or all of `K`, `m`, `M`.

    Returns
    -------
    - `alpha` (float): The constant.

    Raises
    ------
    - `ConfigurationError`: If a parameter is missing or, for Joint, if D^2 >= (c-1) sigma_bar2 / 2.
    """
    setting = AlphaSetting(setting)
    if setting == AlphaSetting.ArMean:
        _require(params, "sigma2", "D")
        return params["sigma2"] / params["D"] ** 2
    if setting == AlphaSetting.Variance:
        _require(params, "c")
        c = params["c"]
        return (c - 1.0) * c**2 / (2.0 * (2.0 - c) ** 2)
    if setting == AlphaSetting.Joint:
        _require(params, "c", "sigma_bar2", "D")
        c, sigma_bar2, D = params["c"], params["sigma_bar2"], params["D"]
        slack = (c - 1.0) * sigma_bar2 / 2.0 - D**2
        if slack <= 0.0:
            raise ConfigurationError(
                f"Joint alpha requires D^2 < (c-1)*sigma_bar2/2, got: D^2={D**2},"
                f" (c-1)*sigma_bar2/2={(c - 1.0) * sigma_bar2 / 2.0}"
            )
        return c**2 * slack / (4.0 * D**2 * (sigma_bar2 + 0.5))
    if "G" in params:
        G = params["G"]
    else:
        _require(params, "K", "m", "M")
        G = math.sqrt(params["K"]) * params["M"] / params["m"]
    return 0.5 * min(1.0, 1.0 / (8.0 * G))


def alpha_from_exp_concavity(mu: float, G: float, D: float) -> float:
    """alpha for a loss that is mu-exp-concave: 1/2 (mu ^ 1/(4GD))."""
    check_positive(mu, "mu")
    return 0.5 * min(mu, 1.0 / (4.0 * G * D))


def alpha_from_strong_convexity(mu: float, G: float) -> float:
    """alpha for a risk that is mu-strongly convex: mu / G^2."""
    check_positive(mu, "mu")
    check_positive(G, "G")
    return mu / G**2


def _mean_block_envelope(p: int, D: float, noise_scale: float, scale: float) -> float:
    return math.sqrt(p) * (D / math.sqrt(2.0)) * (math.sqrt(2.0) * D + ENVELOPE_Z * noise_scale) / scale


def _variance_block_envelope(q: int, c: float, sigma_bar2: float) -> float:
    v0 = c * sigma_bar2 / 2.0
    return math.sqrt(q) * sigma_bar2 * 0.5 * (1.0 / v0 + ENVELOPE_Z**2 * sigma_bar2 / v0**2)


def grad_bound(cfg: ForecasterConfig) -> float:
    """The gradient bound G of a family; an explicit `cfg.grad_bound` takes precedence.

    Observable gradients are unbounded in the observation, so except for the
    mixture this is an envelope that clipping enforces.
    """
    if cfg.grad_bound is not None:
        return cfg.grad_bound
    if isinstance(cfg, ArConfig):
        return _mean_block_envelope(cfg.p, cfg.D, cfg.noise_scale, cfg.sigma2)
    if isinstance(cfg, ArchConfig):
        return _variance_block_envelope(cfg.q, cfg.c, cfg.sigma_bar2)
    if isinstance(cfg, JointConfig):
        mean = _mean_block_envelope(cfg.p, cfg.D, cfg.noise_scale, cfg.variance_floor)
        variance = _variance_block_envelope(cfg.q, cfg.c, cfg.sigma_bar2)
        return math.hypot(mean, variance)
    return cfg.exact_grad_bound


def default_alpha(cfg: ForecasterConfig) -> float:
    if isinstance(cfg, ArConfig):
        return alpha_constant(AlphaSetting.ArMean, sigma2=cfg.sigma2, D=cfg.D)
    if isinstance(cfg, ArchConfig):
        return alpha_constant(AlphaSetting.Variance, c=cfg.c)
    if isinstance(cfg, JointConfig):
        return alpha_constant(AlphaSetting.Joint, c=cfg.c, sigma_bar2=cfg.sigma_bar2, D=cfg.D)
    return alpha_constant(AlphaSetting.Mixture, G=grad_bound(cfg))
