import numpy as np

from dbsom.weights import Scheme, WeightMatrix, balance


__all__ = ["SCHEME"]


class GlobalComponent:
    """
    A mean weight and a dispersion weight per variable, shared by every
    neuron. The product over all 2P weights is 1.
    """

    scheme = Scheme.GLOBAL_COMPONENT

    def solve(self, sm: np.ndarray, sv: np.ndarray) -> tuple[WeightMatrix, bool]:
        pairs = np.stack([sm.sum(axis=0), sv.sum(axis=0)], axis=-1)
        lam, clamped = balance(pairs.reshape(-1))
        return WeightMatrix(self.scheme, lam.reshape(pairs.shape)), clamped


SCHEME = GlobalComponent()
