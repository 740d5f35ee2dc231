import csv
import json
from pathlib import Path
from typing import Any, Iterable, TypeVar

from pydantic import BaseModel, ValidationError

from qirw.core.exceptions import InputError

ModelT = TypeVar("ModelT", bound=BaseModel)


def _describe(errors: list[dict]) -> list[str]:
    lines = []
    for error in errors[:10]:
        where = ".".join(str(part) for part in error.get("loc", ())) or "document"
        lines.append(f"{where}: {error.get('msg')}")
    return lines


def load_document(path: Path | str, model: type[ModelT]) -> ModelT:
    """
    Parse a JSON file into a pydantic document.

    Raises:
        InputError: the file is missing, is not JSON (line and column are reported),
            or does not match the document schema.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"file not found: {path}", data={"path": str(path)})
    text = path.read_text(encoding="utf-8")
    try:
        return model.model_validate_json(text)
    except ValidationError as e:
        errors = e.errors()
        if errors and errors[0].get("type") == "json_invalid":
            try:
                json.loads(text)
            except json.JSONDecodeError as decode_error:
                raise InputError(
                    f"malformed JSON in {path} at line {decode_error.lineno}, column {decode_error.colno}: {decode_error.msg}",
                    data={"path": str(path), "line": decode_error.lineno, "column": decode_error.colno},
                ) from e
        raise InputError(f"{path} is not a valid {model.__name__}", data={"path": str(path), "errors": _describe(errors)}) from e


def write_json(path: Path | str, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2, by_alias=True)
    else:
        text = json.dumps(payload, indent=2, default=str)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def write_text(path: Path | str, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def write_csv(path: Path, columns: list[str], rows: Iterable[dict], append: bool = False) -> Path:
    """Rows as CSV; the header is written unless appending to an existing file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    header = not (append and path.exists())
    with open(path, "a" if append else "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns)
        if header:
            writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path
