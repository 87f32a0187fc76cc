import inspect
from typing import Any, Callable, Sequence

import numpy as np

from sococast.utils.exceptions import ContractError, DefinitionError


def check_type(var: Any, type: Any, func: Callable, src: str = "input") -> None:
    if not isinstance(var, type):
        raise TypeError(f"Func: {func.__qualname__} {src} expected type: {type}")


def check_params(func: Callable, params: Sequence[str]) -> None:
    argspec = inspect.getfullargspec(func)
    param_names = argspec.args
    if set(param_names) != set(params):
        raise DefinitionError(
            f"{func.__qualname__} expects parameters: {sorted(set(params))},"
            f" got: {sorted(set(param_names))}"
        )


def check_min_val(var: float, min_val: float, var_name: str) -> None:
    if var < min_val:
        raise ContractError(
            f"Var: {var_name} should be greater than or equal to {min_val}, got: {var}"
        )


def check_positive(var: float, var_name: str) -> None:
    if not var > 0:
        raise ContractError(f"Var: {var_name} should be positive, got: {var}")


def check_open_interval(var: float, low: float, high: float, var_name: str) -> None:
    if not low < var < high:
        raise ContractError(
            f"Var: {var_name} should lie in ({low}, {high}), got: {var}"
        )


def check_dim(vec: np.ndarray, dim: int, var_name: str) -> None:
    if vec.ndim != 1 or vec.shape[0] != dim:
        raise ContractError(
            f"Var: {var_name} should be a vector of dimension {dim}, got shape: {vec.shape}"
        )


def check_finite(vec: np.ndarray, var_name: str) -> None:
    if not np.all(np.isfinite(vec)):
        raise ContractError(f"Var: {var_name} contains NaN or Inf: {vec}")
