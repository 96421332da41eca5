"""Quasi-periodic travelling waves of damped beams on rectangular tori.

Modules, bottom-up: ``exact`` (radicals and surd sums), ``params`` (admissible
parameter sets), ``resonance`` (symbol, kernel, bifurcation matrix),
``spectral`` (Fourier fields and the nonlinearity), ``solver`` (range and
bifurcation equations, continuation), ``evolution`` (time stepping, energy)
and ``cli``.
"""
__version__ = "0.1.0"
