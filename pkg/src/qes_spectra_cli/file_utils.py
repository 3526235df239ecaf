import json
import logging
import math
import sys
from typing import Any, Dict, List, Optional, Sequence

import fsspec
import pandas as pd

FLOAT_FORMAT = '%.12e'


def _json_value(value):
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(FLOAT_FORMAT % value)
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    return value


def format_table(
        rows: List[Dict[str, Any]],
        columns: Sequence[str],
        fmt: str = 'csv',
        meta: Optional[Dict[str, Any]] = None,
        int_columns: Sequence[str] = (),
) -> str:
    """ Render rows as CSV (pandas, fixed float format) or as a {"meta", "rows"} JSON document. """
    if fmt == 'json':
        doc = {
            'meta': _json_value(meta or {}),
            'rows': [_json_value({c: row.get(c) for c in columns}) for row in rows],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + '\n'
    if fmt != 'csv':
        raise ValueError(f"Unknown table format '{fmt}'.")
    df = pd.DataFrame(rows, columns=list(columns))
    for column in int_columns:
        # nullable ints keep optional ids out of the float format
        df[column] = df[column].astype('Int64')
    return df.to_csv(index=False, float_format=FLOAT_FORMAT)


def write_text(text: str, out: Optional[str] = None):
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with fsspec.open(out, 'w') as f:
        f.write(text)
    logging.info(f'Wrote {out}.')


def write_table(
        rows: List[Dict[str, Any]],
        columns: Sequence[str],
        fmt: str = 'csv',
        out: Optional[str] = None,
        meta: Optional[Dict[str, Any]] = None,
        int_columns: Sequence[str] = (),
) -> str:
    text = format_table(rows, columns, fmt, meta, int_columns)
    write_text(text, out)
    return text
