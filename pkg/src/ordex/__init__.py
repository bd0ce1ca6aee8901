"""Extract wind energy siting ordinances from legal documents with LLM decision trees."""

__version__ = "0.1.0"
