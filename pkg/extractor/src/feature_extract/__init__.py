"""Image-folder to feature-CSV extraction for the subspace pipeline."""

from .extract import ExtractJob, ExtractSummary, extract, extract_random_weights

__version__ = "0.1.0"
