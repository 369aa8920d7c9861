"""Geometric phases, winding numbers and Hamiltonian sign counts for small qubit registers."""

__version__ = "0.1.0"
