"""toricqfi - Toric-code topological order from free-fermion Wilson loops and QFI scaling."""

__version__ = "0.1.0"

__all__ = ["__version__"]
