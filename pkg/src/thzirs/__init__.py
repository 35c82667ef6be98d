"""System-level simulator for multi-IRS terahertz networks with stable-matching association."""

__version__ = "0.1.0"
