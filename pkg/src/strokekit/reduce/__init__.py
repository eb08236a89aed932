"""Feature engineering: PCA and LDA transforms, BFO wrapper selection."""

from .bfo import (
    BfoConfig,
    BfoRun,
    FeatureMask,
    bfo_minimize,
    bfo_select,
    position_to_mask,
    wrapper_fitness,
)
from .lda import DEFAULT_SHRINKAGE, LdaModel, fisher_ratio, lda_fit, lda_transform, scatter_matrices
from .pca import PcaModel, components_for_variance, pca_fit, pca_transform

__all__ = [
    "BfoConfig",
    "BfoRun",
    "FeatureMask",
    "bfo_minimize",
    "bfo_select",
    "position_to_mask",
    "wrapper_fitness",
    "LdaModel",
    "DEFAULT_SHRINKAGE",
    "fisher_ratio",
    "lda_fit",
    "lda_transform",
    "scatter_matrices",
    "PcaModel",
    "components_for_variance",
    "pca_fit",
    "pca_transform",
]
