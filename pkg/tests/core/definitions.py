import numpy as np
from sococast import Generator, OnlineLearner
from sococast.core.forecaster import LossGrad
from sococast.forecasters.gaussian import GaussianForecaster
from sococast.geometry.sets import Box, L1Ball
from sococast.schema.forecast import ConditionalLaw, GaussianForecast


class ConstantForecaster(GaussianForecaster):
    """N(x, 1) on the interval [-1, 1]; the loss is (x - y)^2 / 2."""

    def __init__(self):
        super().__init__(Box(lower=[-1.0], upper=[1.0]), alpha=1.0, grad_bound=1.0)

    def features(self, history):
        return np.zeros(1)

    def design(self, samples):
        return np.zeros((len(samples), 1))

    def _loss_grad(self, x, features, y):
        return LossGrad(0.5 * (x[0] - y) ** 2, np.array([x[0] - y]))

    def _mean_var(self, X, design):
        T = design.shape[0]
        return X[:, 0], np.ones(T), np.ones((T, 1)), np.zeros((T, 1))


class ConstantForecasterBroken1(ConstantForecaster):
    def _loss_grad(self, x, features, obs):
        return LossGrad(0.0, np.zeros(1))


class ConstantForecasterBroken2(ConstantForecaster):
    def _loss_grad(self, x, features, y):
        return [0.0, np.zeros(1)]


class ConstantForecasterBroken3(ConstantForecaster):
    def __init__(self):
        pass


class ConstantForecasterBroken4(ConstantForecaster):
    def _loss_grad(self, x, features, y):
        return LossGrad(0.0, np.array([np.nan]))


class Cumulator(OnlineLearner):
    """Predicts the running sum of the feedback."""

    def __init__(self, dim: int = 2):
        super().__init__(dim, dim)
        self.total = np.zeros(dim)

    def _predict(self):
        return self.total

    def _step(self, feedback):
        self.total += feedback


class CumulatorBroken(Cumulator):
    def __init__(self):
        self.total = np.zeros(2)


class ConstantWalk(Generator):
    """y_t ~ N(y_{t-1} / 2, 1)."""

    def _next_law(self, history, t):
        mean = 0.5 * history[-1] if t > 0 else 0.0
        return ConditionalLaw(mean=mean, variance=1.0)


class ConstantWalkBroken(Generator):
    def _next_law(self, history, t):
        return GaussianForecast(mean=0.0, variance=1.0)


def unit_ball(n: int = 2) -> L1Ball:
    return L1Ball(n=n)


def standard_law() -> ConditionalLaw:
    return ConditionalLaw(mean=0.0, variance=1.0)


def of_type(captured, event_type) -> list:
    """The data of the captured events of one type."""
    return [data for kind, data in captured if kind == event_type]
