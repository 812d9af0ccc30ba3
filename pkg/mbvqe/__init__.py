"""Measurement-based VQE: custom graph states, patterns and their simulation."""
