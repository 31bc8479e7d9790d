"""Braid group actions on n-adic integers."""
