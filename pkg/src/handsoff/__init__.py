"""handsoff: maximum hands-off control for single-input LTI systems."""

__version__ = "0.1.0"
