"""Simulator and design toolkit for lens-focused multi-mode OAM links.

Modules
-------
specfun   Bessel J_n, Airy Ai and Bessel maxima.
array     Concentric UCA design, DFT beamforming and far-field patterns.
lens      Circular-Airy phase lens synthesis and focal predictions.
field     Scalar diffraction (spherical radiation, phase screen, ASM).
rxlink    Probes, hybrid coupler, coupling matrix and 16-QAM BER.
cli       Scenario driven command-line pipeline.
"""

__version__ = "0.1.0"
