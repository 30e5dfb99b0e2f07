import numpy as np

from dbsom.weights import Scheme, WeightMatrix, balance


__all__ = ["SCHEME"]


class ClusterVariable:
    scheme = Scheme.CLUSTER_VARIABLE

    def solve(self, sm: np.ndarray, sv: np.ndarray) -> tuple[WeightMatrix, bool]:
        # one product constraint per neuron
        lam, clamped = balance(sm + sv)
        return WeightMatrix(self.scheme, lam), clamped


SCHEME = ClusterVariable()
