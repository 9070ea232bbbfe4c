"""Steiner forest local search."""
