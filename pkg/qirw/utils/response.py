import json
import sys
from typing import Any, Optional, TextIO

from qirw.core.exceptions import EXIT_INPUT_ERROR, EXIT_OK


def _emit(payload: dict, stream: Optional[TextIO]) -> None:
    stream = stream or sys.stdout
    stream.write(json.dumps(payload, indent=2, default=str))
    stream.write("\n")


def success_response(
    message: str, data: Optional[Any] = None, status_code: int = EXIT_OK, stream: Optional[TextIO] = None
) -> int:
    _emit({"status_code": status_code, "message": message, "data": data}, stream)
    return status_code


def error_response(
    message: str, status_code: int = EXIT_INPUT_ERROR, data: Optional[Any] = None, stream: Optional[TextIO] = None
) -> int:
    _emit({"status_code": status_code, "message": message, "data": data}, stream)
    return status_code
