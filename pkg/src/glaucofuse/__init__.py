"""Glaucoma classification from fundus ROIs fused with disc/cup segmentation."""
from .channels import ChannelSynthesizer
from .masks import Region, TriMask, compute_vcdr, parse_mask
from .metrics import f1_harmonic, roc_auc, select_threshold
from .model import FusionNetClassifier, VcdrLogisticRegression

__all__ = [
    "ChannelSynthesizer", "FusionNetClassifier", "Region", "TriMask", "VcdrLogisticRegression",
    "compute_vcdr", "f1_harmonic", "parse_mask", "roc_auc", "select_threshold",
]
__version__ = "0.1.0"
