"""Exception hierarchy. The CLI maps each family onto a process exit code."""


class BmcSweepError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(BmcSweepError):
    """Bad command line, unreadable input file, missing backend (exit 2)."""


class UsageError(ConfigError):
    pass


class InputError(ConfigError):
    pass


class FatalError(BmcSweepError):
    """Unrecoverable runtime failure (exit 3)."""


class OutputError(FatalError):
    pass


class InternalError(FatalError):
    pass
