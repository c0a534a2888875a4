"""pinchsim: link-level simulator for pinching-antenna systems."""

__version__ = "0.1.0"

__all__ = ["__version__"]
