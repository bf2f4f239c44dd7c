"""Liouville-type verdicts for Levy generators.

The package evaluates characteristic exponents from Levy triplets, locates
their zero sets, decides (strong) Liouville verdicts with explicit
witnesses and checks each verdict spectrally and by Monte Carlo.
"""

__version__ = "0.1.0"
