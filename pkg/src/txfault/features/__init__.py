"""Time-series features of 3-phase differential currents."""
from .catalog import (CATALOGS, FeatureDef, FeatureExtractor, FeatureVector,
                      catalog_descriptor, extract_vector, feature_names,
                      get_catalog, write_catalog_descriptor)
from .ops import (abs_energy, approximate_entropy, ar_coefficients,
                  basic_stats, binned_entropy, change_quantile,
                  dwt_coefficients, fft_coefficients, haar_dwt, sample_entropy)

__all__ = [
    "CATALOGS", "FeatureDef", "FeatureExtractor", "FeatureVector",
    "catalog_descriptor", "extract_vector", "feature_names", "get_catalog",
    "write_catalog_descriptor", "abs_energy", "approximate_entropy",
    "ar_coefficients", "basic_stats", "binned_entropy", "change_quantile",
    "dwt_coefficients", "fft_coefficients", "haar_dwt", "sample_entropy",
]
