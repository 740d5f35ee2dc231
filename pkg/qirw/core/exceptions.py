from typing import Any, Optional

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_CERTIFICATION_FAILURE = 2


class QirwError(Exception):
    """Base error. Carries the CLI exit code and optional witness data."""

    exit_code: int = EXIT_INPUT_ERROR

    def __init__(self, detail: str, data: Optional[dict[str, Any]] = None):
        super().__init__(detail)
        self.detail = detail
        self.data = data or {}


class InputError(QirwError):
    """Malformed input or a violated precondition."""

    exit_code = EXIT_INPUT_ERROR


class ResourceError(QirwError):
    """A request exceeds a configured resource cap."""

    exit_code = EXIT_INPUT_ERROR


class InvariantViolation(QirwError):
    """A runtime-asserted guarantee failed; `data` holds the witness."""

    exit_code = EXIT_CERTIFICATION_FAILURE


class BounderContractError(InvariantViolation):
    """The recursive bounder returned a weighting worse than it claimed."""


class CertificationFailure(QirwError):
    """The independent oracle rejected a synthesis report."""

    exit_code = EXIT_CERTIFICATION_FAILURE
