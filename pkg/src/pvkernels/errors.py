class PvkError(Exception):
    """Base class for library errors."""


class ConfigurationError(PvkError, ValueError):
    """Inconsistent or invalid configuration (shapes, sizes, parameters)."""


class ArgumentError(PvkError, ValueError):
    """An argument is outside the operation's domain, e.g. ``n > N``."""


class FormatError(PvkError, ValueError):
    """A file does not match its declared format."""

    def __init__(self, message: str, offset: int | None = None, path=None):
        self.offset = offset
        self.path = path
        parts = [message]
        if offset is not None:
            parts.append(f"at byte offset {offset}")
        if path is not None:
            parts.append(f"in {path}")
        super().__init__(" ".join(parts))
