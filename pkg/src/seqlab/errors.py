"""Error hierarchy shared across the package.

The CLI maps these onto process exit codes (invalid input -> 1,
integrity -> 2, I/O -> 3); the service maps them onto HTTP statuses.
"""


class SeqlabError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SeqlabError, ValueError):
    """An argument violates an operation's preconditions."""


class ConfigurationError(InvalidInputError):
    """A network or space configuration is outside its allowed domain."""


class IntegrityError(SeqlabError):
    """The results store already holds a conflicting record for a key."""


class ParseError(InvalidInputError):
    """A data file is malformed; message carries the offending line number."""
