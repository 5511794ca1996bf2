"""Fuzzy-torus spectral triples: Dirac spectra, functional calculus and Connes distances."""

__version__ = "0.1.0"
