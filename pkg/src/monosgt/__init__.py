"""Small-gain analysis for negative-feedback loops of monotone SISO systems
with multi-valued input-state characteristics."""

__version__ = "0.1.0"
