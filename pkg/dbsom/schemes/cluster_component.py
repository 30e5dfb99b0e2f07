import numpy as np

from dbsom.weights import Scheme, WeightMatrix, balance


__all__ = ["SCHEME"]


class ClusterComponent:
    scheme = Scheme.CLUSTER_COMPONENT

    def solve(self, sm: np.ndarray, sv: np.ndarray) -> tuple[WeightMatrix, bool]:
        pairs = np.stack([sm, sv], axis=-1)
        lam, clamped = balance(pairs.reshape(pairs.shape[0], -1))
        return WeightMatrix(self.scheme, lam.reshape(pairs.shape)), clamped


SCHEME = ClusterComponent()
