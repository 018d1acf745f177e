"""Loop-group construction of minimal Lagrangian surfaces in CP^2."""

__version__ = "0.1.0"
