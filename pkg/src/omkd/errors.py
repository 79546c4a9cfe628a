class InstanceError(ValueError):
    """Malformed instance data (bad types, out-of-horizon intervals, ...)."""


class DegenerateOfferError(ValueError):
    """Offer with positive reward but zero total weight-time."""


class UndefinedStatsError(ValueError):
    """Fluctuation statistics requested for a resource with no positive density."""

    def __init__(self, resources):
        self.resources = list(resources)
        super().__init__(f"no offer with positive density on resources {self.resources}")


class DomainError(ValueError):
    pass


class HorizonError(IndexError):
    pass


class VariantMismatchError(ValueError):
    pass


class OracleSizeError(ValueError):
    pass


class ConfigError(ValueError):
    """Generator or sweep configuration that cannot be realized."""
