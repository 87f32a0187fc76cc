"""KL divergences and conditional expectations under known laws."""
import math
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy import integrate, stats
from scipy.special import logsumexp

from sococast.schema.forecast import ConditionalLaw, GaussianForecast
from sococast.utils.exceptions import NumericError

QUAD_TOL = 1e-8
QUAD_SPAN = 10.0
HERMITE_NODES = 96

_nodes, _weights = hermegauss(HERMITE_NODES)
_weights = _weights / math.sqrt(2.0 * math.pi)


def hermite_rule() -> Tuple[np.ndarray, np.ndarray]:
    """Nodes z_k and weights w_k with E[f(Z)] ~ sum_k w_k f(z_k) for Z ~ N(0, 1)."""
    return _nodes, _weights


def kl_gaussian(
    p: Union[ConditionalLaw, GaussianForecast], q: GaussianForecast
) -> float:
    """KL(N(p.mean, p.variance) || N(q.mean, q.variance))."""
    return 0.5 * (
        math.log(q.variance / p.variance)
        + (p.variance + (p.mean - q.mean) ** 2) / q.variance
        - 1.0
    )


def gaussian_density(y: Union[float, np.ndarray], forecast: GaussianForecast):
    return stats.norm.pdf(y, loc=forecast.mean, scale=math.sqrt(forecast.variance))


def component_arrays(components: Sequence[GaussianForecast]) -> Tuple[np.ndarray, np.ndarray]:
    means = np.array([c.mean for c in components], dtype=float)
    sds = np.sqrt(np.array([c.variance for c in components], dtype=float))
    return means, sds


def component_log_densities(
    y: np.ndarray, components: Sequence[GaussianForecast]
) -> np.ndarray:
    """log phi_k(y) with a trailing axis over components."""
    means, sds = component_arrays(components)
    return stats.norm.logpdf(np.asarray(y, dtype=float)[..., None], loc=means, scale=sds)


def mixture_log_density(
    y: np.ndarray, weights: np.ndarray, components: Sequence[GaussianForecast]
) -> np.ndarray:
    return logsumexp(component_log_densities(y, components), b=weights, axis=-1)


def law_log_density(law: ConditionalLaw, y: np.ndarray) -> np.ndarray:
    if law.is_gaussian:
        return stats.norm.logpdf(y, loc=law.mean, scale=math.sqrt(law.variance))
    with np.errstate(divide="ignore"):
        return np.log(law.density(y))


def quadrature_range(
    law: ConditionalLaw, components: Sequence[GaussianForecast] = ()
) -> Tuple[float, float]:
    """An interval covering QUAD_SPAN standard deviations of the law and every component."""
    centers = [law.mean] + [c.mean for c in components]
    sds = [math.sqrt(law.variance)] + [math.sqrt(c.variance) for c in components]
    lo = min(m - QUAD_SPAN * s for m, s in zip(centers, sds))
    hi = max(m + QUAD_SPAN * s for m, s in zip(centers, sds))
    return lo, hi


def law_expectation(
    law: ConditionalLaw,
    func: Callable[[np.ndarray], np.ndarray],
    components: Sequence[GaussianForecast] = (),
) -> np.ndarray:
    """E[func(Y)] for Y ~ law.

    Gaussian laws use a fixed Gauss-Hermite rule, other densities adaptive
    vector quadrature over the `quadrature_range`.

    Raises
    ------
    - `NumericError`: If the adaptive quadrature does not reach the tolerance.
    """
    if law.is_gaussian:
        nodes, weights = hermite_rule()
        values = func(law.mean + math.sqrt(law.variance) * nodes)
        return np.tensordot(weights, values, axes=(0, 0))
    lo, hi = quadrature_range(law, components)

    def integrand(y: float) -> np.ndarray:
        y_arr = np.array([y])
        return law.density(y_arr)[0] * func(y_arr)[0]

    value, error = integrate.quad_vec(integrand, lo, hi, epsabs=QUAD_TOL, epsrel=QUAD_TOL)
    if not np.all(np.isfinite(value)) or np.max(error) > 100 * QUAD_TOL:
        raise NumericError("Quadrature did not converge", residual=float(np.max(error)))
    return value


def kl_mixture(
    p: ConditionalLaw,
    weights: np.ndarray,
    components: Sequence[GaussianForecast],
) -> float:
    """KL(p || sum_k weights_k N(components_k)) by adaptive quadrature.

    Raises
    ------
    - `NumericError`: If the quadrature reports non-convergence.
    """
    weights = np.asarray(weights, dtype=float)
    lo, hi = quadrature_range(p, components)
    points: List[float] = sorted({p.mean} | {c.mean for c in components})

    def integrand(y: float) -> float:
        log_p = float(law_log_density(p, np.array(y)))
        if not np.isfinite(log_p):
            return 0.0
        log_q = float(mixture_log_density(np.array(y), weights, components))
        return math.exp(log_p) * (log_p - log_q)

    result = integrate.quad(
        integrand,
        lo,
        hi,
        epsabs=QUAD_TOL,
        epsrel=QUAD_TOL,
        limit=200,
        points=points,
        full_output=1,
    )
    if len(result) > 3:
        raise NumericError(f"KL quadrature failed: {result[3]}", residual=result[1])
    return max(float(result[0]), 0.0)


def gaussian_quadratic_moment(
    A: np.ndarray, B: np.ndarray, C: np.ndarray, delta: np.ndarray, var: np.ndarray
) -> np.ndarray:
    """E[(C + A z + B z^2)^2] for z ~ N(delta, var), element-wise."""
    m1 = delta
    m2 = delta**2 + var
    m3 = delta**3 + 3.0 * delta * var
    m4 = delta**4 + 6.0 * delta**2 * var + 3.0 * var**2
    return (
        C**2
        + 2.0 * A * C * m1
        + (A**2 + 2.0 * B * C) * m2
        + 2.0 * A * B * m3
        + B**2 * m4
    )
