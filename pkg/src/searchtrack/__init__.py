"""Multi-agent planning for searching and tracking mobile objects with Bernoulli filters."""

__version__ = "0.1.0"
