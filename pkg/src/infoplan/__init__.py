"""Information-theoretic experiment planning with a simulated pea-genetics world."""

__version__ = "0.1.0"
