from .diagnostics import (
    check_h2_empirical,
    check_pathwise_bounds,
    log_fit,
    quantile_check,
    surrogate_decomposition,
)
from .generators import GENERATORS, build_generator
from .harness import (
    SeedResult,
    build_forecaster,
    build_learner,
    comparator_search,
    run_experiment,
    run_seeds,
    simulate,
)
from .verification import SUITES, run_suite
