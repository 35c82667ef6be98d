"""Exception types shared across the package."""


class DegenerateGeometryError(ValueError):
    """Two points that must be distinct coincide."""


class InfeasibleAllocationError(ValueError):
    """An allocation violates the one-to-one Tx-IRS-Rx constraints."""


class UnsupportedConfigurationError(ValueError):
    """Network dimensions the association algorithms do not handle (N < K, L != K)."""


class BudgetExceededError(RuntimeError):
    """An enumeration would evaluate more candidates than the configured budget."""


class ConfigError(ValueError):
    """Invalid configuration document; ``path`` names the offending field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
