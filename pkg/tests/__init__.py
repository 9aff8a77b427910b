"""qtrack test suite."""
