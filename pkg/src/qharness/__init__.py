"""Markov quadratic harnesses from generalized beta integrals."""
__version__ = "0.1.0"
