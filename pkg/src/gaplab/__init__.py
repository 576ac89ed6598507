"""Desk-scale laboratory for privileged experts, imitation, and adaptive IL/RL weighting."""

__version__ = "0.1.0"
