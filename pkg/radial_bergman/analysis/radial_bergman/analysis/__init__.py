"""Class diagnostics, boundedness criteria, kernels and projections."""
