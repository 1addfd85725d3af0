from abc import ABC, abstractmethod
from enum import Enum

import numpy as np
import numpy.typing as npt

Points = npt.NDArray[np.float64]


class MapKind(str, Enum):
    AFFINE = "affine-scaling"
    SINE = "sine-deformed"
    TRANSFINITE = "transfinite"
    COMPOSED = "composed"


class ElementMap(ABC):
    """Reference square [-1, 1]^2 onto a physical element.

    ``evaluate`` returns x with shape (M, 2), the deformation gradient
    F[:, i, j] = dx_i/dxi_j with shape (M, 2, 2) and J = det F with shape (M,).
    """

    kind: MapKind

    @abstractmethod
    def evaluate(self, xi1: Points, xi2: Points) -> tuple[Points, Points, Points]:
        pass

    def position(self, xi1: Points, xi2: Points) -> Points:
        return self.evaluate(xi1, xi2)[0]


class Curve(ABC):
    """Parametric curve on t in [0, 1]"""

    @abstractmethod
    def __call__(self, t: Points) -> Points:
        pass

    @abstractmethod
    def derivative(self, t: Points) -> Points:
        pass
