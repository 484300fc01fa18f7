"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class SpiketrumError(Exception):
    exit_code = 1


class ConfigError(SpiketrumError, ValueError):
    exit_code = 2


class DataIOError(SpiketrumError, OSError):
    exit_code = 3


class ValidationError(SpiketrumError, ValueError):
    exit_code = 4


class SizingError(ValidationError):
    pass


class InsufficientDataError(ValidationError):
    pass
