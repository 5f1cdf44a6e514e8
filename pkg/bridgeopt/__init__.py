"""GA and CMA-ES design optimization of a cable-stayed footbridge."""

__version__ = "1.0.0"
