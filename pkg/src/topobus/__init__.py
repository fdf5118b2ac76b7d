"""Topological quantum bus simulator: Majorana wire, flux-qubit parity readout, parity-based protocols."""

__version__ = "0.1.0"
