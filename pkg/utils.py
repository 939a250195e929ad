"""
Formatting helpers for the ED degree toolkit
Rationals, vectors and numeric results to display strings and JSON-safe values
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import aiofiles
import numpy as np

from error_handler import error_handler


def format_rational(value) -> str:
    """3, -3/5"""
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def format_vector(values: Sequence) -> str:
    return "(" + ", ".join(format_rational(x) for x in values) + ")"


def format_complex(z: complex, digits: int = 10) -> str:
    z = complex(z)
    if abs(z.imag) <= 10 ** -digits * max(1.0, abs(z)):
        return f"{z.real:.{digits}g}"
    return f"{z.real:.{digits}g}{z.imag:+.{digits}g}i"


def parse_direction(text: str) -> tuple:
    """'1,-2,0' -> (1, -2, 0)"""
    try:
        return tuple(int(piece.strip()) for piece in text.split(","))
    except ValueError as e:
        raise ValueError(f"direction must be comma-separated integers, got {text!r}") from e


def to_jsonable(value: Any) -> Any:
    """Recursively convert rationals, complex numbers and numpy values for json.dumps"""
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else format_rational(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return to_jsonable(float(value))
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return [to_jsonable(x) for x in value.tolist()]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(x) for x in items]
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def dumps(data: Any) -> str:
    return json.dumps(to_jsonable(data), indent=2, sort_keys=True)


async def _write_text(filepath, text: str):
    async with aiofiles.open(filepath, mode='w', encoding='utf-8') as file:
        await file.write(text)


async def write_json(filepath, filecontent):
    """Write JSON content to file asynchronously, creating missing parent directories"""
    text = dumps(filecontent) + "\n"
    try:
        await _write_text(filepath, text)
    except FileNotFoundError as e:
        recovered = error_handler.handle_error(
            e, f"writing JSON file {filepath}",
            recovery_func=lambda: Path(filepath).parent.mkdir(parents=True, exist_ok=True))
        if not recovered:
            raise
        await _write_text(filepath, text)
    except OSError as e:
        error_handler.handle_error(e, f"writing JSON file {filepath}")
        raise
