"""Exception hierarchy shared across the pipeline stages."""


class ChatToxError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 5


# -- taxonomy / parsing ------------------------------------------------------

class ParseFailure(ChatToxError, ValueError):
    """A label token is not part of the taxonomy."""


# -- ingest ------------------------------------------------------------------

class MalformedDump(ChatToxError):
    def __init__(self, message, byte_offset=None, source=None):
        self.byte_offset = byte_offset
        self.source = source
        where = f" at byte {byte_offset}" if byte_offset is not None else ""
        src = f"{source}: " if source else ""
        super().__init__(f"{src}{message}{where}")


class MissingField(ChatToxError):
    def __init__(self, field, record_index, source=None):
        self.field = field
        self.record_index = record_index
        self.source = source
        src = f"{source}: " if source else ""
        super().__init__(f"{src}comment #{record_index} lacks '{field}'")


class DuplicateStream(ChatToxError):
    pass


class FileNotReadable(ChatToxError):
    exit_code = 3


# -- classification ----------------------------------------------------------

class BackendError(ChatToxError):
    """Transient backend failure; retried with backoff."""

    exit_code = 4


class BackendTimeout(BackendError):
    pass


class BackendHttpError(BackendError):
    def __init__(self, message, status=None):
        self.status = status
        super().__init__(message)


class QuotaExceeded(BackendHttpError):
    pass


class BackendUnavailable(ChatToxError):
    """Retries exhausted. Committed labels stay in the store."""

    exit_code = 4


class ReplayMiss(ChatToxError):
    """The replay log holds no response for a payload. Never retried."""

    exit_code = 4


class StoreCorrupt(ChatToxError):
    pass


# -- statistics --------------------------------------------------------------

class DegenerateInput(ChatToxError, ValueError):
    pass


class DegenerateAgreement(ChatToxError, ValueError):
    """Both raters constant and identical: expected agreement is 1."""


class NegativeInput(ChatToxError, ValueError):
    pass


class GroupTooSmall(ChatToxError, ValueError):
    pass


class EigenFailure(ChatToxError):
    pass


# -- analysis ----------------------------------------------------------------

class MissingLabels(ChatToxError):
    exit_code = 3


class DegenerateSplit(ChatToxError, ValueError):
    pass


class UnitTooSmall(ChatToxError, ValueError):
    pass


class InsufficientClass(ChatToxError, ValueError):
    pass


class RowMismatch(ChatToxError, ValueError):
    pass


# -- cli ---------------------------------------------------------------------

class ConfigInvalid(ChatToxError):
    exit_code = 2


class StageMissingInput(ChatToxError):
    exit_code = 3
