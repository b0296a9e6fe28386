"""Exception types raised across the package.

Everything inherits from ClaimcheckError so callers can catch broadly.
Gateway failures have their own branch because the detection pipeline
treats them differently from caller mistakes: a bad request from the
user is final, while an upstream hiccup may allow degraded operation.
"""

from __future__ import annotations


class ClaimcheckError(Exception):
    """Base class for all errors raised by this package."""

    code = "internal_error"

    def __init__(self, message: str, *, detail: object | None = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


class ValidationError(ClaimcheckError):
    """Caller-supplied input violated a documented precondition."""

    code = "invalid_request"

    def __init__(self, message: str, *, code: str | None = None, detail: object | None = None):
        super().__init__(message, detail=detail)
        if code is not None:
            self.code = code


class ConfigError(ClaimcheckError):
    """Configuration file or runtime wiring is unusable."""

    code = "invalid_config"


class DimensionMismatchError(ValidationError):
    """A vector's dimension disagrees with the index or gateway."""

    code = "dimension_mismatch"


class ZeroVectorError(ValidationError):
    """A zero (or non-finite) vector has no direction to compare."""

    code = "zero_vector"


class DatasetFormatError(ClaimcheckError):
    """An evaluation dataset file failed to parse; carries line numbers."""

    code = "dataset_format"

    def __init__(self, message: str, *, lines: list[int] | None = None):
        super().__init__(message, detail={"lines": lines or []})
        self.lines = lines or []


class GatewayError(ClaimcheckError):
    """Base class for model gateway failures."""

    code = "upstream_error"


class DeadlineExceededError(GatewayError):
    """The total time budget for a gateway call ran out."""

    code = "upstream_deadline"


class UpstreamStatusError(GatewayError):
    """The upstream service answered with a non-success HTTP status."""

    code = "upstream_status"

    def __init__(self, message: str, *, status: int, detail: object | None = None):
        super().__init__(message, detail=detail)
        self.status = status


class UpstreamProtocolError(GatewayError):
    """The upstream service answered 200 but the payload was malformed."""

    code = "upstream_protocol"
