"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised for invalid dimensions, names, ranges, or config files."""


class DivergenceError(RuntimeError):
    """Raised when training produces non-finite losses or gradients.

    Carries the optimizer step index at which the blow-up was detected.
    """

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (at optimizer step {step})")
        self.step = step
