"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or arguments that violate an operation contract."""


class StateError(RuntimeError):
    """Operation invoked in an invalid order (e.g. backward before forward)."""


class ConvergenceError(RuntimeError):
    """Training failed to reach its target; carries the final metric."""

    def __init__(self, message: str, final_accuracy: float):
        super().__init__(f"{message} (final accuracy {final_accuracy:.4f})")
        self.final_accuracy = final_accuracy


class QuantizationRangeError(ValueError):
    """Input values fall outside the quantizer's accepted range."""


class DecodeError(Exception):
    """Entropy-coded payload cannot be decoded (truncated or inconsistent)."""


class ParseError(Exception):
    """Malformed wire data: bad magic, version, or structure."""


class TraceRangeError(ValueError):
    """Queried time interval lies outside the bandwidth trace."""
