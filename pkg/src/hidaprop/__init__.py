"""Propagators of the harmonic oscillator perturbed by singular measure potentials.

Closed-form free and forced-oscillator kernels, their white-noise T- and
S-transforms, and the perturbation series in a signed space-time measure
with certified truncation error.
"""
__version__ = "0.1.0"
