"""Slotted-time data-dissemination simulator with network-coded payloads and
game-theoretic channel access."""

__version__ = "0.1.0"
