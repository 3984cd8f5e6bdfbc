"""Supervised-autonomy control stack for an indoor inspection quadrotor."""

__version__ = "0.1.0"
