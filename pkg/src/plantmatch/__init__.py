"""Planted matching detection: exact and cluster-expansion likelihoods."""
