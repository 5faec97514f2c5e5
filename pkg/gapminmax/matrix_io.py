"""
Reading and writing split operators as plain text or CSV.

Text format: a header line "dim_plus dim_minus", then the n x n entries of A
row by row, then optionally the n x n entries of the Gram matrix S. Lines
starting with '#' are ignored. CSV files carry the same content with the
header as the first row.
"""
import json
import logging
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from .minmax import MinMaxSolution, SplitOperator

logger = logging.getLogger(__name__)


def _parse_numbers(tokens: List[str], source: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in tokens])
    except ValueError as e:
        raise ValueError(f"Non-numeric entry in {source}: {e}")


def read_matrix(file_path: Union[str, Path]) -> SplitOperator:
    """
    Load a split operator from a text or CSV matrix file.

    Args:
        file_path: Path to the file (.csv is read as comma separated)

    Returns:
        SplitOperator

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValueError: If the header or the entry count is malformed
    """
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"Matrix file not found: {file_path}")

    if path.suffix.lower() == '.csv':
        # the header row is shorter than the matrix rows, so size the columns from it first
        header = pd.read_csv(path, header=None, comment='#', skipinitialspace=True, nrows=1)
        width = max(2, int(np.nansum(pd.to_numeric(header.iloc[0], errors='coerce'))))
        frame = pd.read_csv(path, header=None, comment='#', skipinitialspace=True,
                            names=list(range(width)))
        rows = [[str(v) for v in row if not pd.isna(v)] for row in frame.values.tolist()]
    else:
        with open(path, 'r', encoding='utf-8') as f:
            rows = [line.split() for line in f
                    if line.strip() and not line.lstrip().startswith('#')]

    if not rows or len(rows[0]) != 2:
        raise ValueError(f"{file_path}: first line must be 'dim_plus dim_minus'")
    try:
        dim_plus, dim_minus = (int(float(v)) for v in rows[0])
    except ValueError:
        raise ValueError(f"{file_path}: dimensions must be integers, got {rows[0]}")
    if dim_plus < 1 or dim_minus < 1:
        raise ValueError(f"{file_path}: both dimensions must be positive")

    n = dim_plus + dim_minus
    entries = _parse_numbers([t for row in rows[1:] for t in row], str(file_path))
    if entries.size == n * n:
        a, s = entries.reshape(n, n), None
    elif entries.size == 2 * n * n:
        a, s = entries[:n * n].reshape(n, n), entries[n * n:].reshape(n, n)
    else:
        raise ValueError(
            f"{file_path}: expected {n * n} or {2 * n * n} entries, found {entries.size}"
        )

    logger.debug(f"Read {n}x{n} operator ({dim_plus}+{dim_minus}) from {file_path}")
    return SplitOperator.from_full(a, dim_plus, s)


def write_matrix(op: SplitOperator, file_path: Union[str, Path], include_gram: bool = True) -> Path:
    """Write a real split operator in the text matrix format."""
    if np.iscomplexobj(op.a_pm) or np.iscomplexobj(op.a_pp) or np.iscomplexobj(op.a_mm):
        raise ValueError("The text matrix format only holds real operators")
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(f"{op.dim_plus} {op.dim_minus}\n")
        np.savetxt(f, op.full_matrix(), fmt='%.17g')
        if include_gram:
            np.savetxt(f, op.gram(), fmt='%.17g')
    return path


def solutions_to_json(solutions: List[MinMaxSolution]) -> str:
    """Serialize solved levels as deterministic JSON records."""
    return json.dumps([s.to_record() for s in solutions], indent=2, sort_keys=True)
