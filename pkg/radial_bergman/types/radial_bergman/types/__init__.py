"""Radial weights, quadrature and moments."""
