"""Transport maps between free Gibbs states at matrix scale."""

__version__ = "0.1.0"
