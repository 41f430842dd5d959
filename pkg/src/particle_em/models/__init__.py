from .base import Model
from .hierarchical import GaussianHierarchicalModel
from .logistic import BayesianLogisticRegression, sigmoid, softplus
from .network import LatentSpaceNetworkModel

__all__ = [
    "Model",
    "GaussianHierarchicalModel",
    "BayesianLogisticRegression",
    "LatentSpaceNetworkModel",
    "sigmoid",
    "softplus",
]
