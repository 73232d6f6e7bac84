"""Reading and validating ghzq result files (CSV with comment metadata)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REQUIRED_METADATA = ("tool", "kind", "seed", "command")


class FigureDataError(ValueError):
    """Result file cannot back the requested figure."""


@dataclass(frozen=True)
class ResultTable:
    metadata: dict[str, str]
    columns: tuple[str, ...]
    cells: tuple[tuple[str, ...], ...]

    @property
    def n_rows(self) -> int:
        return len(self.cells)

    def column(self, name: str) -> np.ndarray:
        """Numeric column by name; raises a descriptive error when absent."""
        if name not in self.columns:
            raise FigureDataError(
                f"missing column {name!r}; file has {', '.join(self.columns)}"
            )
        idx = self.columns.index(name)
        try:
            return np.array([float(row[idx]) for row in self.cells])
        except ValueError as exc:
            raise FigureDataError(f"column {name!r} is not numeric: {exc}") from None

    def require_columns(self, names) -> None:
        missing = [name for name in names if name not in self.columns]
        if missing:
            raise FigureDataError(
                f"missing columns {missing}; file has {list(self.columns)}"
            )


def read_result(path: str) -> ResultTable:
    metadata: dict[str, str] = {}
    columns: tuple[str, ...] | None = None
    cells: list[tuple[str, ...]] = []
    with open(path, "r", encoding="utf-8") as handle:
        for raw in handle:
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                key, sep, value = line.lstrip("# ").partition("=")
                if sep:
                    metadata[key.strip()] = value.strip()
                continue
            parts = tuple(part.strip() for part in line.split(","))
            if columns is None:
                columns = parts
            else:
                if len(parts) != len(columns):
                    raise FigureDataError(
                        f"row has {len(parts)} cells, header has {len(columns)}"
                    )
                cells.append(parts)
    missing = [key for key in REQUIRED_METADATA if key not in metadata]
    if missing:
        raise FigureDataError(
            f"metadata header incomplete, missing {missing}; refusing to render "
            "a file of unknown provenance"
        )
    if columns is None:
        raise FigureDataError("file contains no header row")
    return ResultTable(metadata=metadata, columns=columns, cells=tuple(cells))
