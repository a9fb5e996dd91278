"""Conditional independence in stationary diffusions via trek separation."""

__version__ = "0.1.0"
