"""Code-quality feedback bot for student Java repositories."""

__version__ = "0.1.0"
