import os
import re
from typing import Any, Dict, Optional

from src.utils.helpers import SUPPORTED_EXPORTS, parse_vector

_INTEGER_PATTERN = re.compile(r'^[+-]?\d+$')


def validate_integer(value: Optional[str], name: str = 'value', minimum: Optional[int] = None) -> Dict[str, Any]:
    """
    Validate an arbitrary-precision decimal integer argument.

    Args:
        value: Raw argument text
        name: Argument name used in error messages
        minimum: Smallest accepted value, if any

    Returns:
        Dictionary with validation results
    """
    if value is None or str(value).strip() == '':
        return {'is_valid': False, 'error': f'{name}: empty value', 'parsed_value': None}

    text = str(value).strip()
    if not _INTEGER_PATTERN.match(text):
        return {'is_valid': False, 'error': f'{name}: not an integer: {text!r}', 'parsed_value': None}

    parsed = int(text)
    if minimum is not None and parsed < minimum:
        return {'is_valid': False, 'error': f'{name}: must be >= {minimum}, got {parsed}', 'parsed_value': None}
    return {'is_valid': True, 'parsed_value': parsed}


def validate_vector(value: Optional[str], length: Optional[int] = None) -> Dict[str, Any]:
    """Validate a comma-separated integer vector such as "4,-1,1"."""
    if not value:
        return {'is_valid': False, 'error': 'empty vector', 'parsed_value': None}
    try:
        parsed = parse_vector(value)
    except ValueError as e:
        return {'is_valid': False, 'error': f'invalid vector {value!r}: {e}', 'parsed_value': None}
    if length is not None and len(parsed) != length:
        return {
            'is_valid': False,
            'error': f'vector has {len(parsed)} entries, expected {length}',
            'parsed_value': None,
        }
    return {'is_valid': True, 'parsed_value': parsed}


def validate_target_range(bmin: int, bmax: int, limit: int = 10 ** 6) -> Dict[str, Any]:
    """Probe ranges must be non-empty and finite."""
    if bmin > bmax:
        return {'is_valid': False, 'error': f'empty range: bmin={bmin} > bmax={bmax}'}
    if bmax - bmin + 1 > limit:
        return {'is_valid': False, 'error': f'range of {bmax - bmin + 1} targets exceeds {limit}'}
    return {'is_valid': True, 'count': bmax - bmin + 1}


def validate_output_path(path: Optional[str]) -> Dict[str, Any]:
    """Check the --out target: supported extension and an existing parent directory."""
    if not path:
        return {'is_valid': False, 'error': 'empty output path'}
    extension = os.path.splitext(path)[1].lower()
    if extension not in SUPPORTED_EXPORTS:
        return {'is_valid': False, 'error': f'unsupported output format {extension!r}', 'extension': extension}
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        return {'is_valid': False, 'error': f'directory does not exist: {parent}', 'extension': extension}
    return {'is_valid': True, 'extension': extension}
