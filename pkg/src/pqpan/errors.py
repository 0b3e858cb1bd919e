"""Exception hierarchy.

Everything raised on purpose by this package derives from PqpanError so the
CLI can map model/domain failures to a single exit code.
"""


class PqpanError(Exception):
    """Base class for all model, data, and protocol errors."""


class UnknownScheme(PqpanError):
    """Scheme name not present in the bundled parameter table."""


class UnsupportedScheme(PqpanError):
    """Scheme exists but the requested operation cannot serve it."""


class ParseError(PqpanError):
    """A bundled or user-supplied data file failed to parse."""

    def __init__(self, message: str, *, path: str = "", row: int | None = None,
                 column: str | None = None):
        where = path or "<data>"
        if row is not None:
            where += f":row {row}"
        if column is not None:
            where += f":{column}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.row = row
        self.column = column


class ConsistencyError(PqpanError):
    """Parsed data violates a cross-field invariant."""


class SizeMismatch(PqpanError):
    """A byte-string argument has the wrong length for its scheme."""


class InvalidConfig(PqpanError):
    """Link configuration outside the modeled bounds."""


class InvalidProfile(PqpanError):
    """Radio/MCU profile with non-positive fields."""


class SingularSystem(PqpanError):
    """Current-fit design matrix is rank deficient."""


class HandshakeFailure(PqpanError):
    """Reassembled artifact does not match the scheme's sizes."""


class NotEstablished(PqpanError):
    """Payload transfer requested before the handshake completed."""
