"""qtrack - optimal continuous-time quantum error tracking."""

__version__ = "0.1.0"
