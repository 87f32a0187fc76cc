from abc import abstractmethod
from typing import List, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator
from typing_extensions import Annotated

from sococast.geometry.projection import (
    project_box,
    project_l1_ball,
    project_positive_l1,
    project_simplex,
)
from sococast.utils.typechecking import check_dim

MEMBERSHIP_TOL = 1e-12


class ConvexSet(BaseModel):
    """Base class for the bounded closed convex sets used as feasible sets.

    Methods
    -------
    - `project` : Euclidean projection onto the set.
    - `contains` : Membership test with tolerance.
    - `diameter` : Exact Euclidean diameter D.
    - `center` : A canonical feasible point (used as the default initial prediction).
    - `sample` : Random feasible points, optionally mixed with vertices.
    """

    model_config = ConfigDict(frozen=True)

    @property
    @abstractmethod
    def dim(self) -> int:
        raise NotImplementedError

    @abstractmethod
    def _project(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def _contains(self, x: np.ndarray, tol: float) -> bool:
        raise NotImplementedError

    @abstractmethod
    def diameter(self) -> float:
        raise NotImplementedError

    @abstractmethod
    def center(self) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def _sample_interior(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def random_vertex(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def project(self, y: np.ndarray) -> np.ndarray:
        """Euclidean projection argmin_{x in set} ||x - y||_2.

        Raises
        ------
        - `ContractError`: If `y` does not have the dimension of the set.
        """
        y = np.asarray(y, dtype=float)
        check_dim(y, self.dim, "y")
        return self._project(y)

    def contains(self, x: np.ndarray, tol: float = MEMBERSHIP_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.dim or not np.all(np.isfinite(x)):
            return False
        return self._contains(x, tol)

    def sample(
        self, rng: np.random.Generator, n: int, vertex_prob: float = 0.0
    ) -> np.ndarray:
        """Draw `n` feasible points, each a vertex with probability `vertex_prob`."""
        points = np.empty((n, self.dim))
        for i in range(n):
            if vertex_prob > 0.0 and rng.random() < vertex_prob:
                points[i] = self.random_vertex(rng)
            else:
                points[i] = self._sample_interior(rng)
        return points


def _dirichlet_body(rng: np.random.Generator, dim: int) -> np.ndarray:
    # uniform on {x >= 0, sum(x) <= 1}
    e = rng.exponential(size=dim + 1)
    return e[:dim] / e.sum()


class L1Ball(ConvexSet):
    """The l1-ball {x : ||x||_1 <= radius}."""

    kind: Literal["l1_ball"] = "l1_ball"
    radius: PositiveFloat = 1.0
    n: PositiveInt

    @property
    def dim(self) -> int:
        return self.n

    def _project(self, y: np.ndarray) -> np.ndarray:
        return project_l1_ball(y, self.radius)

    def _contains(self, x: np.ndarray, tol: float) -> bool:
        return bool(np.abs(x).sum() <= self.radius + tol * max(1.0, self.radius))

    def diameter(self) -> float:
        return 2.0 * self.radius

    def center(self) -> np.ndarray:
        return np.zeros(self.n)

    def _sample_interior(self, rng: np.random.Generator) -> np.ndarray:
        signs = rng.choice([-1.0, 1.0], size=self.n)
        return self.radius * signs * _dirichlet_body(rng, self.n)

    def random_vertex(self, rng: np.random.Generator) -> np.ndarray:
        x = np.zeros(self.n)
        x[rng.integers(self.n)] = self.radius * rng.choice([-1.0, 1.0])
        return x


class Simplex(ConvexSet):
    """The probability simplex {x >= 0, sum(x) = 1} in dimension `n`."""

    kind: Literal["simplex"] = "simplex"
    n: PositiveInt

    @property
    def dim(self) -> int:
        return self.n

    def _project(self, y: np.ndarray) -> np.ndarray:
        return project_simplex(y, 1.0)

    def _contains(self, x: np.ndarray, tol: float) -> bool:
        return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol * self.n)

    def diameter(self) -> float:
        return float(np.sqrt(2.0))

    def center(self) -> np.ndarray:
        return np.full(self.n, 1.0 / self.n)

    def _sample_interior(self, rng: np.random.Generator) -> np.ndarray:
        return rng.dirichlet(np.ones(self.n))

    def random_vertex(self, rng: np.random.Generator) -> np.ndarray:
        x = np.zeros(self.n)
        x[rng.integers(self.n)] = 1.0
        return x


class Box(ConvexSet):
    """The box {x : lower <= x <= upper} (coordinate-wise)."""

    kind: Literal["box"] = "box"
    lower: List[float]
    upper: List[float]

    @model_validator(mode="after")
    def _check_bounds(self) -> "Box":
        if len(self.lower) == 0 or len(self.lower) != len(self.upper):
            raise ValueError("lower and upper must be non-empty and of equal length")
        if any(lo > up for lo, up in zip(self.lower, self.upper)):
            raise ValueError("lower must not exceed upper in any coordinate")
        return self

    @property
    def dim(self) -> int:
        return len(self.lower)

    def _project(self, y: np.ndarray) -> np.ndarray:
        return project_box(y, np.asarray(self.lower), np.asarray(self.upper))

    def _contains(self, x: np.ndarray, tol: float) -> bool:
        return bool(
            np.all(x >= np.asarray(self.lower) - tol)
            and np.all(x <= np.asarray(self.upper) + tol)
        )

    def diameter(self) -> float:
        return float(np.linalg.norm(np.asarray(self.upper) - np.asarray(self.lower)))

    def center(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.lower) + np.asarray(self.upper))

    def _sample_interior(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lower, self.upper)

    def random_vertex(self, rng: np.random.Generator) -> np.ndarray:
        upper = rng.random(self.dim) < 0.5
        return np.where(upper, self.upper, self.lower).astype(float)


class PositiveL1(ConvexSet):
    """The set {x >= 0, ||x||_1 <= radius}."""

    kind: Literal["positive_l1"] = "positive_l1"
    radius: PositiveFloat
    n: PositiveInt

    @property
    def dim(self) -> int:
        return self.n

    def _project(self, y: np.ndarray) -> np.ndarray:
        return project_positive_l1(y, self.radius)

    def _contains(self, x: np.ndarray, tol: float) -> bool:
        return bool(
            np.all(x >= -tol) and x.sum() <= self.radius + tol * max(1.0, self.radius)
        )

    def diameter(self) -> float:
        return float(self.radius * np.sqrt(2.0))

    def center(self) -> np.ndarray:
        return np.zeros(self.n)

    def _sample_interior(self, rng: np.random.Generator) -> np.ndarray:
        return self.radius * _dirichlet_body(rng, self.n)

    def random_vertex(self, rng: np.random.Generator) -> np.ndarray:
        k = rng.integers(self.n + 1)
        x = np.zeros(self.n)
        if k < self.n:
            x[k] = self.radius
        return x


class Product(ConvexSet):
    """Cartesian product of sets, coordinates laid out part after part."""

    kind: Literal["product"] = "product"
    parts: List["FeasibleSet"]

    @model_validator(mode="after")
    def _check_parts(self) -> "Product":
        if len(self.parts) == 0:
            raise ValueError("a product needs at least one part")
        return self

    @property
    def dim(self) -> int:
        return sum(part.dim for part in self.parts)

    @property
    def offsets(self) -> List[int]:
        offsets = [0]
        for part in self.parts:
            offsets.append(offsets[-1] + part.dim)
        return offsets

    def split(self, x: np.ndarray) -> List[np.ndarray]:
        offsets = self.offsets
        return [x[offsets[i] : offsets[i + 1]] for i in range(len(self.parts))]

    def _project(self, y: np.ndarray) -> np.ndarray:
        return np.concatenate(
            [part.project(block) for part, block in zip(self.parts, self.split(y))]
        )

    def _contains(self, x: np.ndarray, tol: float) -> bool:
        return all(
            part.contains(block, tol) for part, block in zip(self.parts, self.split(x))
        )

    def diameter(self) -> float:
        return float(np.sqrt(sum(part.diameter() ** 2 for part in self.parts)))

    def center(self) -> np.ndarray:
        return np.concatenate([part.center() for part in self.parts])

    def _sample_interior(self, rng: np.random.Generator) -> np.ndarray:
        return np.concatenate([part._sample_interior(rng) for part in self.parts])

    def random_vertex(self, rng: np.random.Generator) -> np.ndarray:
        return np.concatenate([part.random_vertex(rng) for part in self.parts])


FeasibleSet = Annotated[
    Union[L1Ball, Simplex, Box, PositiveL1, Product], Field(discriminator="kind")
]

Product.model_rebuild()
