"""Clustering of networks with nodal time series via kernel-ARMA features on the Grassmannian."""

__version__ = "0.1.0"
