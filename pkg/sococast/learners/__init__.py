from .boa import BernsteinOnlineAggregation, boa_pathwise_bound, boa_theorem_bound
from .ons import OnlineNewtonStep, ons_gamma_bound, ons_pathwise_bound, ons_theorem_bound
from .stack import (
    BoaOnsStack,
    ComparatorLearner,
    ExpertBank,
    ExpertLabel,
    FixedExpert,
    default_max_order,
    make_gamma_grid,
    make_joint_order_prior,
    make_order_prior,
    stack_theorem_bound,
)
