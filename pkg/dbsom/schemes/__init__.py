from ..weights import Scheme, WeightingScheme

from .cluster_component import SCHEME as CLUSTER_COMPONENT
from .cluster_variable import SCHEME as CLUSTER_VARIABLE
from .global_component import SCHEME as GLOBAL_COMPONENT
from .global_variable import SCHEME as GLOBAL_VARIABLE

BY_SCHEME: dict[Scheme, WeightingScheme] = {
    Scheme.GLOBAL_VARIABLE: GLOBAL_VARIABLE,
    Scheme.GLOBAL_COMPONENT: GLOBAL_COMPONENT,
    Scheme.CLUSTER_VARIABLE: CLUSTER_VARIABLE,
    Scheme.CLUSTER_COMPONENT: CLUSTER_COMPONENT,
}
