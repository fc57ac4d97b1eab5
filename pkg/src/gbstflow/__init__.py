"""Packet-stream flow classification with gradient-boosted Set-Trees."""

__version__ = "0.1.0"
