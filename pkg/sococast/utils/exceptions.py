from typing import Optional

import numpy as np


class SococastError(Exception):
    pass


class ContractError(SococastError, ValueError):
    pass


class ConfigurationError(ContractError):
    pass


class DefinitionError(SococastError):
    pass


class NumericError(SococastError, ArithmeticError):
    """Raised when an iterative numerical routine does not converge.

    Attributes
    ----------
    - `last_iterate` (np.ndarray, optional): The last iterate reached before giving up.
    - `residual` (float, optional): The last measured residual.
    - `round_index` (int, optional): The online round during which the failure happened.
    """

    def __init__(
        self,
        message: str,
        last_iterate: Optional[np.ndarray] = None,
        residual: Optional[float] = None,
        round_index: Optional[int] = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.last_iterate = last_iterate
        self.residual = residual
        self.round_index = round_index

    def at_round(self, round_index: int) -> "NumericError":
        return NumericError(
            f"Round {round_index}: {self.message}",
            last_iterate=self.last_iterate,
            residual=self.residual,
            round_index=round_index,
        )
