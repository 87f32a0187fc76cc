from .alpha import (
    AlphaSetting,
    alpha_constant,
    alpha_from_exp_concavity,
    alpha_from_strong_convexity,
    default_alpha,
    grad_bound,
)
from .ar import ArForecaster, ar_features, ar_loss_grad
from .arch import ArchForecaster, arch_features, arch_variance, qlik_loss_grad
from .joint import JointGaussianForecaster, joint_gaussian_loss_grad
from .kl import gaussian_density, kl_gaussian, kl_mixture
from .mixture import MixtureForecaster, localized_gaussian_grid, mixture_loss_grad
