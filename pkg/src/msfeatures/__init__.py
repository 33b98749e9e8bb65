"""Feature metrics for Spring Cloud style microservice systems."""

__version__ = "0.1.0"
