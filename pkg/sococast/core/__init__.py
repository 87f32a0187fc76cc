from .forecaster import Forecaster, LossGrad
from .generator import Generator
from .learner import OnlineLearner
