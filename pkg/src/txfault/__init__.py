"""Synthetic transformer differential-current data, time-series features and
from-scratch tree classifiers for internal-fault detection and typing."""
__version__ = "0.1.0"
