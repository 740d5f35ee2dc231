"""Additive-error reweighting of quasi-isometries into graphs of bounded path-width."""

__version__ = "0.1.0"
