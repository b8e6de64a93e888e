from .classifier import FusionNetClassifier
from .logistic import LogisticVcdrModel, VcdrLogisticRegression, fit_logistic_vcdr
from .network import BackboneConfig, backward, forward, fuse

__all__ = [
    "BackboneConfig", "FusionNetClassifier", "LogisticVcdrModel", "VcdrLogisticRegression",
    "backward", "fit_logistic_vcdr", "forward", "fuse",
]
