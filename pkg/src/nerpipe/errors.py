"""Exception types shared across the pipeline stages."""


class NerPipeError(Exception):
    """Base class for all library errors."""


class CorpusParseError(NerPipeError):
    """Malformed corpus input; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class TagError(NerPipeError):
    """Tag sequence of an unexpected shape; carries the token position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"position {position}: {message}")
        self.position = position


class NothingToMaskError(NerPipeError):
    """Raised when masking a sentence that has no entity spans."""


class PlaceholderMismatchError(NerPipeError):
    """Placeholder count in a variant does not match the template. Retryable."""

    def __init__(self, found: int, expected: int, label: str | None = None):
        where = f" for label {label!r}" if label else ""
        super().__init__(f"expected {expected} placeholder(s){where}, found {found}")
        self.found = found
        self.expected = expected
        self.label = label


class UnknownLabelError(NerPipeError):
    """Variant contains a placeholder label absent from the template. Retryable."""

    def __init__(self, label: str):
        super().__init__(f"placeholder label {label!r} not in template")
        self.label = label


class ResponseParseError(NerPipeError):
    """LLM response is not the expected JSON shape. Retryable."""


class VariantCountError(NerPipeError):
    """LLM returned the wrong number of variants. Retryable."""

    def __init__(self, found: int, expected: int):
        super().__init__(f"expected {expected} variant(s), found {found}")
        self.found = found
        self.expected = expected


class TransportError(NerPipeError):
    """Network or endpoint failure while talking to an external service."""


class SchemaError(NerPipeError):
    """Label missing from the schema, or a malformed schema file."""


class BudgetError(NerPipeError):
    """A token, or a whole entity span, cannot fit inside the token budget."""
