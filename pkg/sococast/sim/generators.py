import math

import numpy as np

from sococast.core.generator import Generator
from sococast.forecasters.ar import ar_clip
from sococast.forecasters.gaussian import recent_lags
from sococast.geometry.projection import project_l1_ball
from sococast.schema.config import (
    Garch11Spec,
    GaussianIidSpec,
    GeneratorSpec,
    MisspecifiedSpec,
    MixtureTruthSpec,
    NonStationaryARSpec,
    WellSpecifiedARCHSpec,
    WellSpecifiedARSpec,
    WellSpecifiedJointSpec,
)
from sococast.schema.forecast import ConditionalLaw
from sococast.schema.pubsub import Event
from sococast.utils.pubsub import publish_event


def _clipped_lags(history: np.ndarray, order: int, D: float) -> np.ndarray:
    return ar_clip(recent_lags(history, order), D)


def _clipped_square_lags(history: np.ndarray, order: int, sigma_bar2: float) -> np.ndarray:
    return np.minimum(recent_lags(history**2, order), sigma_bar2)


class WellSpecifiedAR(Generator):
    """Gaussian AR(p) on clipped lags, so that 2 m_t^2 <= D^2."""

    def __init__(self, spec: WellSpecifiedARSpec, seed: int = 0) -> None:
        super().__init__(seed)
        self.spec = spec
        self.coeffs = np.asarray(spec.coeffs, dtype=float)

    def _next_law(self, history: np.ndarray, t: int) -> ConditionalLaw:
        lags = _clipped_lags(history, self.spec.p, self.spec.D)
        return ConditionalLaw(mean=float(self.coeffs @ lags), variance=self.spec.noise_var)


class WellSpecifiedARCH(Generator):
    """Centered Gaussian ARCH(q) with variance in [c sigma_bar2 / 2, sigma_bar2]."""

    def __init__(self, spec: WellSpecifiedARCHSpec, seed: int = 0) -> None:
        super().__init__(seed)
        self.spec = spec
        self.coeffs = np.asarray(spec.coeffs, dtype=float)
        self.floor = spec.c * spec.sigma_bar2 / 2.0

    def _next_law(self, history: np.ndarray, t: int) -> ConditionalLaw:
        squares = _clipped_square_lags(history, self.spec.q, self.spec.sigma_bar2)
        return ConditionalLaw(mean=0.0, variance=self.floor + float(self.coeffs @ squares))


class Garch11(Generator):
    """Centered GARCH(1,1); the variance is clamped to the forecaster's range."""

    def __init__(self, spec: Garch11Spec, seed: int = 0) -> None:
        super().__init__(seed)
        self.spec = spec
        self.floor = spec.c * spec.sigma_bar2 / 2.0
        self.clamp_count = 0
        self._variance = self.floor

    def _clamp(self, variance: float, t: int) -> float:
        clamped = min(max(variance, self.floor), self.spec.sigma_bar2)
        if clamped != variance:
            self.clamp_count += 1
            if self.clamp_count == 1:
                publish_event(
                    Event.ClampEvent,
                    id(self),
                    {"what": "GARCH variance", "t": t, "value": variance},
                )
        return clamped

    def _next_law(self, history: np.ndarray, t: int) -> ConditionalLaw:
        if t == 0:
            self._variance = self._clamp(self.spec.omega, t)
        else:
            raw = self.spec.omega + self.spec.a * history[-1] ** 2 + self.spec.b * self._variance
            self._variance = self._clamp(raw, t)
        return ConditionalLaw(mean=0.0, variance=self._variance)


class NonStationaryAR(Generator):
    def __init__(self, spec: NonStationaryARSpec, seed: int = 0) -> None:
        super().__init__(seed)
        self.spec = spec
        self.base = np.asarray(spec.base_coeffs, dtype=float)

    def coeffs(self, t: int) -> np.ndarray:
        drift = self.spec.amplitude * math.sin(2.0 * math.pi * t / self.spec.period)
        return project_l1_ball(self.base + drift / self.base.shape[0], 1.0)

    def _next_law(self, history: np.ndarray, t: int) -> ConditionalLaw:
        lags = _clipped_lags(history, self.base.shape[0], self.spec.D)
        return ConditionalLaw(mean=float(self.coeffs(t) @ lags), variance=self.spec.noise_var)


class Misspecified(Generator):
    def __init__(self, spec: MisspecifiedSpec, seed: int = 0) -> None:
        super().__init__(seed)
        self.spec = spec

    def _next_law(self, history: np.ndarray, t: int) -> ConditionalLaw:
        s = self.spec
        mean = s.mean_amplitude * math.sin(2.0 * math.pi * t / s.mean_period)
        wave = 0.5 * (1.0 + math.sin(2.0 * math.pi * t / s.var_period))
        return ConditionalLaw(mean=mean, variance=s.var_low + (s.var_high - s.var_low) * wave)


class GaussianIid(Generator):
    def __init__(self, spec: GaussianIidSpec, seed: int = 0) -> None:
        super().__init__(seed)
        self.law = ConditionalLaw(mean=spec.mean, variance=spec.variance)

    def _next_law(self, history: np.ndarray, t: int) -> ConditionalLaw:
        return self.law


class WellSpecifiedJoint(Generator):
    def __init__(self, spec: WellSpecifiedJointSpec, seed: int = 0) -> None:
        super().__init__(seed)
        self.spec = spec
        self.mean_coeffs = np.asarray(spec.mean_coeffs, dtype=float)
        self.var_coeffs = np.asarray(spec.var_coeffs, dtype=float)
        self.floor = spec.c * spec.sigma_bar2 / 2.0

    def _next_law(self, history: np.ndarray, t: int) -> ConditionalLaw:
        lags = _clipped_lags(history, self.mean_coeffs.shape[0], self.spec.D)
        squares = _clipped_square_lags(history, self.var_coeffs.shape[0], self.spec.sigma_bar2)
        return ConditionalLaw(
            mean=float(self.mean_coeffs @ lags),
            variance=self.floor + float(self.var_coeffs @ squares),
        )


class MixtureTruth(Generator):
    """The law is one of the mixture components, switching every `segment` rounds."""

    def __init__(self, spec: MixtureTruthSpec, seed: int = 0) -> None:
        super().__init__(seed)
        self.spec = spec
        self.laws = [
            ConditionalLaw(mean=c.mean, variance=c.variance) for c in spec.components
        ]

    def _next_law(self, history: np.ndarray, t: int) -> ConditionalLaw:
        position = (t // self.spec.segment) % len(self.spec.cycle)
        return self.laws[self.spec.cycle[position]]


GENERATORS = {
    "well_specified_ar": WellSpecifiedAR,
    "well_specified_arch": WellSpecifiedARCH,
    "garch11": Garch11,
    "non_stationary_ar": NonStationaryAR,
    "misspecified": Misspecified,
    "gaussian_iid": GaussianIid,
    "well_specified_joint": WellSpecifiedJoint,
    "mixture_truth": MixtureTruth,
}


def build_generator(spec: GeneratorSpec, seed: int) -> Generator:
    return GENERATORS[spec.kind](spec, seed)
