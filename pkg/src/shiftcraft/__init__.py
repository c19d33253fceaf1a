"""shiftcraft: shape-biased training and augmented validation for single-source domain generalization."""

__version__ = "0.1.0"
