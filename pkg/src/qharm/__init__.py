"""qharm: exact harmonic analysis on matrix spaces over small finite fields."""

__version__ = "0.1.0"
