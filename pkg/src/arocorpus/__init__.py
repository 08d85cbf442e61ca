"""Corpus-engineering toolkit for Aromanian-Romanian parallel data."""

__version__ = "0.1.0"
