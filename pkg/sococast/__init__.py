__version__ = "0.1.0"

from .core.forecaster import Forecaster
from .core.generator import Generator
from .core.learner import OnlineLearner
from .learners.boa import BernsteinOnlineAggregation
from .learners.ons import OnlineNewtonStep
from .learners.stack import BoaOnsStack, ExpertBank
from .schema.config import ExperimentConfig, RegretRecord
from .schema.forecast import ConditionalLaw, GaussianForecast, MixtureForecast
from .sim.harness import run_experiment, run_seeds, simulate
