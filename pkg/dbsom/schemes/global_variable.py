import numpy as np

from dbsom.weights import Scheme, WeightMatrix, balance


__all__ = ["SCHEME"]


class GlobalVariable:
    """One weight per variable shared by every neuron; the weights multiply to 1."""

    scheme = Scheme.GLOBAL_VARIABLE

    def solve(self, sm: np.ndarray, sv: np.ndarray) -> tuple[WeightMatrix, bool]:
        lam, clamped = balance((sm + sv).sum(axis=0))
        return WeightMatrix(self.scheme, lam), clamped


SCHEME = GlobalVariable()
