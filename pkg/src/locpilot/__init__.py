"""Location-aware pilot assignment for single-cell massive MIMO uplink under Rician fading."""

__version__ = "0.1.0"
