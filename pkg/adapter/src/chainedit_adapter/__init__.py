"""Edit-session service applying batches to a model through an editing backend."""

__version__ = "0.1.0"
