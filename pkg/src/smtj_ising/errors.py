"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An argument broke a documented precondition (shape, index, range)."""


class UnsupportedInstance(ValueError):
    """The problem instance cannot be encoded (e.g. fewer than 3 cities)."""


class CalibrationError(RuntimeError):
    """Device calibration data was degenerate and no fit exists."""


class TsplibParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedFormat(ValueError):
    """TSPLIB content we deliberately do not handle (GEO, explicit matrices...)."""
