"""Image attribution by greedy submodular subset selection over masked sub-regions."""

__version__ = "0.1.0"
