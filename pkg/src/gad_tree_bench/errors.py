"""Exception hierarchy.

Every error carries a short machine-readable ``code``. The CLI turns any
:class:`GadError` into ``{"error": {...}}`` on stderr via :meth:`GadError.to_dict`.
"""

from typing import Any


class GadError(Exception):
    """Base class for all errors raised by the toolkit."""

    code = "gad_error"

    def __init__(self, message: str, **details: Any):
        """Initialize the error.

        Args:
            message: Human-readable description
            **details: Extra machine-readable fields (edge index, path, line, ...)
        """
        super().__init__(message)
        self.message = message
        self.details = {key: value for key, value in details.items() if value is not None}

    def to_dict(self) -> dict[str, Any]:
        """Render the error as a JSON-serialisable object."""
        return {"code": self.code, "message": self.message, **self.details}


class ValidationError(GadError):
    """Input violates a documented precondition."""

    code = "validation_error"

    def __init__(self, message: str, index: int | None = None, **details: Any):
        super().__init__(message, index=index, **details)
        self.index = index


class DatasetFormatError(ValidationError):
    """A dataset file is missing or malformed."""

    code = "dataset_format_error"

    def __init__(self, message: str, path: str | None = None, line: int | None = None, **details: Any):
        location = f"{path}:{line}: " if path and line else (f"{path}: " if path else "")
        super().__init__(f"{location}{message}", path=path, line=line, **details)
        self.path = path
        self.line = line


class DegenerateLabelsError(ValidationError):
    """Labels do not contain enough of both classes."""

    code = "degenerate_labels"


class InsufficientLabelsError(DegenerateLabelsError):
    """Not enough labeled nodes of a class to draw the requested split."""

    code = "insufficient_labels"


class UnknownFamilyError(ValidationError):
    """Model family name is not registered."""

    code = "unknown_family"


class DivergenceError(GadError):
    """Training produced non-finite logits, gradients or hessians."""

    code = "divergence"


class TrialError(GadError):
    """A repeat or search trial failed; wraps the underlying error."""

    code = "trial_failed"

    def __init__(self, message: str, cause: Exception | None = None, **details: Any):
        if isinstance(cause, GadError):
            details.setdefault("cause", cause.to_dict())
        elif cause is not None:
            details.setdefault("cause", {"code": type(cause).__name__, "message": str(cause)})
        super().__init__(message, **details)
