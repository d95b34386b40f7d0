class TadicError(Exception):
    """Base exception for all library errors"""

    pass


class FieldError(TadicError):
    """Invalid finite-field construction or operation"""

    pass


class PrecisionError(TadicError):
    """A computation ran out of p-adic or pi-adic precision"""

    pass


class EnumerationGuardError(TadicError):
    """Brute-force enumeration would exceed the configured guard"""

    pass


class PolygonError(TadicError):
    """Invalid polygon input or parameters"""

    pass


class ConvergenceError(TadicError):
    """Adaptive precision escalation did not stabilize"""

    pass


class ConfigError(TadicError):
    """Invalid job configuration"""

    pass
