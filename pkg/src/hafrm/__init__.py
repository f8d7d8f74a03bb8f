"""hafrm: desk-scale training and evaluation kit for hybrid-aligned reward models."""

__version__ = "0.1.0"
