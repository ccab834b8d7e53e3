"""Exception classes shared across the package.

The CLI maps these onto distinct exit codes: configuration problems
exit 2, numerical failures exit 3, I/O failures exit 4.
"""


class ConfigError(ValueError):
    """A configuration value or combination violates its constraint."""


class IntegrationError(RuntimeError):
    """Time integration failed; carries the last time that was still good."""

    def __init__(self, message, last_time=None):
        super().__init__(message)
        self.last_time = last_time
