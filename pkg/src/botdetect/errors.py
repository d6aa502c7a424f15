"""Exception hierarchy shared across the package.

Every error carries a ``category`` used by the service layer and the CLI to
derive HTTP error bodies and process exit codes:

    io -> 1, input-format -> 2, training-data -> 3, model-file -> 4, remote-api -> 5
"""


class BotDetectError(Exception):
    category = "internal"


class IoFailure(BotDetectError):
    category = "io"


# --- corpus ingestion / partitioning ---

class MalformedRecord(BotDetectError):
    category = "input-format"

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DuplicateCommentId(BotDetectError):
    category = "input-format"

    def __init__(self, comment_id: str, line_no: int | None = None):
        where = f" (line {line_no})" if line_no is not None else ""
        super().__init__(f"duplicate comment_id {comment_id!r}{where}")
        self.comment_id = comment_id


class UnknownLabel(BotDetectError):
    category = "input-format"

    def __init__(self, value, line_no: int | None = None):
        where = f" (line {line_no})" if line_no is not None else ""
        super().__init__(f"unknown label {value!r}{where}")
        self.value = value


class TooFewGroups(BotDetectError):
    category = "input-format"


class LengthMismatch(BotDetectError):
    category = "input-format"


class EmptyInput(BotDetectError):
    category = "input-format"


# --- encoding / training ---

class EmptyVocabulary(BotDetectError):
    category = "training-data"


class SingleClassTraining(BotDetectError):
    category = "training-data"


class NegativeFeatureValue(BotDetectError):
    category = "training-data"


class EmptyTraining(BotDetectError):
    category = "training-data"


class KTooLarge(BotDetectError):
    category = "training-data"


class EvenK(BotDetectError):
    category = "training-data"


class DimensionMismatch(BotDetectError):
    category = "input-format"


# --- model persistence ---

class FormatVersionMismatch(BotDetectError):
    category = "model-file"


class CorruptModelFile(BotDetectError):
    category = "model-file"


# --- remote API ---

class AuthRejected(BotDetectError):
    category = "remote-api"


class RepoNotFound(BotDetectError):
    category = "remote-api"


class RateLimitExhausted(BotDetectError):
    category = "remote-api"


class NetworkFailure(BotDetectError):
    category = "remote-api"


EXIT_CODES = {
    "io": 1,
    "input-format": 2,
    "training-data": 3,
    "model-file": 4,
    "remote-api": 5,
}


def exit_code_for(category: str) -> int:
    return EXIT_CODES.get(category, 1)
