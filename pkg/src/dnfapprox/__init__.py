"""DNF approximators for Boolean functions, with brute-force verifiers."""
__version__ = "0.1.0"
