"""Coupled-cell network workbench: fundamental networks, center manifold reduction, branches."""
__version__ = "0.1.0"
