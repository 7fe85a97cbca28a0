"""Metropolis-Hastings over filter likelihoods."""
