"""paritylab CLI: seeded batch commands with JSON/CSV artifacts."""

__version__ = "0.1.0"
