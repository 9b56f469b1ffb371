"""Simulated fault attacks on SLH-DSA: signing, fault injection, tree grafting and exact complexity."""

__version__ = "0.1.0"
