import json
import os
import time
from typing import Any, Callable, Dict, List, Sequence

import pandas as pd

SUPPORTED_EXPORTS = ('.json', '.jsonl', '.csv', '.xlsx')


def stringify_integers(payload: Any) -> Any:
    """
    Recursively replace ints with decimal strings.

    JSON output never carries bare integers, so arbitrarily large values
    survive any consumer. Booleans and None are left alone.

    Args:
        payload: Nested dicts/lists/tuples of JSON-compatible values

    Returns:
        Same structure with integers as strings
    """
    if isinstance(payload, bool) or payload is None:
        return payload
    if isinstance(payload, int):
        return str(payload)
    if isinstance(payload, dict):
        return {k: stringify_integers(v) for k, v in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [stringify_integers(v) for v in payload]
    return payload


def to_json_text(payload: Dict[str, Any], indent: int = 2) -> str:
    return json.dumps(stringify_integers(payload), indent=indent, default=str)


def format_vector(values: Sequence[int]) -> str:
    """Render (4, -1, 1)."""
    return '(' + ', '.join(str(v) for v in values) + ')'


def parse_vector(text: str) -> List[int]:
    """Inverse of the --at syntax "4,-1,1"; raises ValueError on bad tokens."""
    tokens = [t.strip() for t in text.strip().strip('()').split(',')]
    if not tokens or any(t == '' for t in tokens):
        raise ValueError(f'empty coordinate in {text!r}')
    return [int(t) for t in tokens]


def indent_block(text: str, prefix: str = '  ') -> str:
    return '\n'.join(prefix + line for line in text.splitlines())


def export_report(frame: pd.DataFrame, output_path: str) -> str:
    """
    Export a report table; the format follows the file extension.

    Args:
        frame: Report rows
        output_path: Target path ending in .json, .jsonl, .csv or .xlsx

    Returns:
        The path written
    """
    extension = os.path.splitext(output_path)[1].lower()
    if extension not in SUPPORTED_EXPORTS:
        raise ValueError(f'unsupported export format {extension!r}; use one of {SUPPORTED_EXPORTS}')
    directory = os.path.dirname(output_path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    if extension == '.json':
        frame.to_json(output_path, orient='records', indent=2)
    elif extension == '.jsonl':
        frame.to_json(output_path, orient='records', lines=True)
    elif extension == '.csv':
        frame.to_csv(output_path, index=False)
    else:
        frame.to_excel(output_path, index=False, engine='openpyxl', sheet_name='report')
    return output_path


def export_payload_to_json(payload: Dict[str, Any], output_path: str) -> str:
    """Write one command payload as JSON (integers as strings)."""
    with open(output_path, 'w', encoding='utf-8') as f:
        f.write(to_json_text(payload))
        f.write('\n')
    return output_path


def time_call(func: Callable, *args, **kwargs) -> Dict[str, Any]:
    """
    Run func and measure wall-clock time.

    Returns:
        Dictionary with 'result', 'execution_time_seconds' and 'success';
        exceptions are captured under 'error'
    """
    start_time = time.perf_counter()
    try:
        result = func(*args, **kwargs)
        success, error = True, None
    except Exception as e:
        result, success, error = None, False, f'{type(e).__name__}: {e}'
    elapsed = time.perf_counter() - start_time
    return {
        'result': result,
        'execution_time_seconds': round(elapsed, 4),
        'success': success,
        'error': error,
    }
