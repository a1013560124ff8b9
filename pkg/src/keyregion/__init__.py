"""Secret-key, storage and privacy-leakage rate regions for key generation
from private identifiers observed over compound channels."""

__version__ = "0.1.0"
