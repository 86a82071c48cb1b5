"""Text appearance similarity toolkit."""
__version__ = "0.1.0"
