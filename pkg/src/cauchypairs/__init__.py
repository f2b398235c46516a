"""Verification and construction toolkit for parallel-spinor Cauchy data on
oriented three-manifolds and their globally hyperbolic developments."""

__version__ = "0.1.0"
