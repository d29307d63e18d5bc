"""Exception hierarchy shared by every paperrank module."""


class PaperRankError(Exception):
    """Base class for all errors raised by this package."""


class NotFoundError(PaperRankError, LookupError):
    """An identifier (paper or author) is not known to the graph, state or backend."""


class GraphError(PaperRankError, ValueError):
    """Records cannot be assembled into a consistent citation graph."""


class DataInconsistencyError(PaperRankError, ValueError):
    """A record carries values that make a rank undefined (e.g. a citer with no references)."""


class StateError(PaperRankError):
    """Invalid operation on a rank state."""


class StateFormatError(StateError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IntegrityError(StateError):
    """A loaded state violates its footer checksums or the conservation law."""


class SnapshotError(PaperRankError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ApiError(PaperRankError):
    """Base class for failures talking to the citation-metadata backend."""


class TransportError(ApiError):
    """Retryable failure: connection error or 5xx response."""


class RateLimitError(TransportError):
    """Backend answered 429 more times than the retry cap allows."""


class ProtocolError(ApiError):
    """Backend broke the wire contract (bad payload, cursor loop)."""
