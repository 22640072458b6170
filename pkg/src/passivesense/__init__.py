"""Behavioral markers from passive smartphone sensing logs (Bluetooth, GPS, battery)."""

__version__ = "0.1.0"
