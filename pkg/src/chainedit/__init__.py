"""Rule-driven chain expansion of knowledge edits, with mining, alignment, dataset variants, and evaluation."""

__version__ = "0.1.0"
