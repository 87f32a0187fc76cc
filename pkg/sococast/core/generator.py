from abc import ABC, abstractmethod
from typing import List, Tuple

import numpy as np

from sococast.schema.forecast import ConditionalLaw, LawPath
from sococast.utils.typechecking import check_min_val, check_type

BIT_GENERATOR = "numpy.random.Philox"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


class Generator(ABC):
    """Abstract class for synthetic time series with known conditional laws.

    Methods
    -------
    - `_next_law` (abstract): Implement this method to return the law of the next observation.
    - `_draw` : Sample one observation from a law. Gaussian by default.
    - `__call__` : Internally calls `_next_law` and `_draw` for T rounds.

    Attributes
    ----------
    - `seed` (int): Seed of the counter-based Philox bit generator.
    """

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    @abstractmethod
    def _next_law(self, history: np.ndarray, t: int) -> ConditionalLaw:
        """Return the law of the observation at round `t` given `history` = samples[:t].
        Do not use this method directly. Use `__call__` instead.
        """
        raise NotImplementedError

    def _draw(self, law: ConditionalLaw, rng: np.random.Generator) -> float:
        return float(law.mean + np.sqrt(law.variance) * rng.standard_normal())

    def __call__(self, T: int) -> Tuple[np.ndarray, LawPath]:
        """Generate a sample path of length `T` and its conditional laws.

        Returns
        -------
        - `samples` (np.ndarray): The observations y_0, ..., y_{T-1}.
        - `laws` (`LawPath`): laws[t] depends on samples[:t] only.
        """
        check_min_val(T, 1, "T")
        rng = make_rng(self.seed)
        samples = np.empty(T)
        laws: List[ConditionalLaw] = []
        for t in range(T):
            law = self._next_law(samples[:t], t)
            check_type(law, ConditionalLaw, self._next_law, "output")
            samples[t] = self._draw(law, rng)
            laws.append(law)
        return samples, LawPath(laws)
