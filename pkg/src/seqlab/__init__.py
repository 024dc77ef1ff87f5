"""Desk-scale lab for BiLSTM sequence taggers and seed-score distributions."""

__version__ = "0.1.0"
