"""Error detection for text-to-SQL parser predictions."""

__version__ = "0.1.0"
