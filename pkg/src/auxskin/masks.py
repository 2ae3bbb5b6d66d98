"""Plain-text boolean grids: one row per line, characters ``0`` and ``1``.

Cells may be packed (``0110``) or separated by spaces or commas (``0 1 1 0``).

Row 0 is the top row of the array, column 0 the leftmost column.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError


def parse_grid(text: str, shape: tuple[int, int] | None = None, source: str | None = None) -> np.ndarray:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].replace(",", " ")
        line = "".join(line.split())
        if not line:
            continue
        bad = set(line) - {"0", "1"}
        if bad:
            raise ParseError(f"grid rows may only contain 0 and 1, found {sorted(bad)}",
                             line=lineno, path=source)
        if rows and len(line) != len(rows[0]):
            raise ParseError(f"row has {len(line)} cells, expected {len(rows[0])}",
                             line=lineno, path=source)
        rows.append([ch == "1" for ch in line])
    if not rows:
        raise ParseError("grid file is empty", path=source)
    grid = np.array(rows, dtype=bool)
    if shape is not None and grid.shape != tuple(shape):
        raise ValidationError(f"grid is {grid.shape[0]}x{grid.shape[1]}, "
                              f"expected {shape[0]}x{shape[1]}")
    return grid


def load_grid(path, shape: tuple[int, int] | None = None) -> np.ndarray:
    path = Path(path)
    return parse_grid(path.read_text(), shape, source=str(path))


def dumps_grid(grid) -> str:
    grid = np.asarray(grid, dtype=bool)
    return "".join("".join("1" if v else "0" for v in row) + "\n" for row in grid)


def write_grid(grid, path) -> Path:
    path = Path(path)
    path.write_text(dumps_grid(grid))
    return path
