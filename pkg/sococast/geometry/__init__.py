import numpy as np

from .projection import a_norm_project, project_l1_ball, project_simplex
from .sets import Box, FeasibleSet, L1Ball, PositiveL1, Product, Simplex


def euclid_project(feasible_set: FeasibleSet, y: np.ndarray) -> np.ndarray:
    return feasible_set.project(y)


def diameter(feasible_set: FeasibleSet) -> float:
    return feasible_set.diameter()
