"""Likelihood-ratio GAN toolkit: loss construction, certification, solving, training."""

from .losses import (
    LossPair,
    OmegaTransform,
    RangeInterval,
    RatioNotRecoverableError,
    SquashDescriptor,
    make_loss_pair,
    make_monotone_loss,
    normalize_psi,
    output_squashing_for,
    ratio_from_discriminator,
)
from .catalogue import CatalogueEntry, catalogue_lookup, catalogue_names, iter_catalogue

__version__ = "0.1.0"

__all__ = [
    "LossPair",
    "OmegaTransform",
    "RangeInterval",
    "RatioNotRecoverableError",
    "SquashDescriptor",
    "make_loss_pair",
    "make_monotone_loss",
    "normalize_psi",
    "output_squashing_for",
    "ratio_from_discriminator",
    "CatalogueEntry",
    "catalogue_lookup",
    "catalogue_names",
    "iter_catalogue",
    "__version__",
]
