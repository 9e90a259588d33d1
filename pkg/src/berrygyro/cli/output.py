"""Deterministic CSV/JSON writers and the per-run record."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__

FLOAT_FMT = ".17g"


@dataclass(frozen=True)
class Table:
    """Column-oriented dataset destined for one CSV file."""

    columns: tuple[str, ...]
    data: tuple[np.ndarray, ...]
    units: str = ""

    def __post_init__(self):
        if len(self.columns) != len(self.data):
            raise ValueError("one array per column")
        if len({len(c) for c in self.data}) > 1:
            raise ValueError("columns differ in length")

    @classmethod
    def of(cls, units: str = "", **cols) -> "Table":
        return cls(tuple(cols), tuple(np.asarray(v) for v in cols.values()), units)

    def column(self, name: str) -> np.ndarray:
        return self.data[self.columns.index(name)]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), FLOAT_FMT)


def render_csv(table: Table, meta: dict[str, str]) -> str:
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    if table.units:
        lines.append(f"# units: {table.units}")
    lines.append(",".join(table.columns))
    for row in zip(*table.data):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no inf/nan; keep them as strings
        return x if math.isfinite(x) else str(x)
    return obj


def render_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def read_csv(path: str | Path) -> tuple[dict[str, str], dict[str, np.ndarray]]:
    """Inverse of :func:`render_csv`: metadata dict and float columns."""
    meta, header, rows = {}, None, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition(": ")
            meta[key] = val
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append([float(v) for v in line.split(",")])
    arr = np.array(rows, dtype=float).reshape(-1, len(header))
    return meta, {name: arr[:, i] for i, name in enumerate(header)}


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def config_digest(config: dict) -> str:
    text = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return sha256_bytes(text.encode())


def write_outputs(
    out_dir: str | Path,
    outputs: dict[str, Table | dict],  # keyed by file name
    *,
    command: str,
    config: dict,
    formats=("csv", "json"),
    grid: dict | None = None,
    wall_clock_s: float = 0.0,
) -> dict[str, str]:
    """Render everything in memory, then write files and ``run.json``.

    Returns the per-file checksums.  Rendering first means a failure leaves
    no partial output behind.
    """
    meta = {
        "berrygyro": __version__,
        "command": command,
        "config_sha256": config_digest(config),
    }
    rendered: dict[str, str] = {}
    for fname, obj in outputs.items():
        if fname.rsplit(".", 1)[-1] not in formats:
            continue
        if isinstance(obj, Table):
            rendered[fname] = render_csv(obj, meta)
        else:
            rendered[fname] = render_json({"meta": meta, **obj})
    checksums = {fname: sha256_bytes(text.encode()) for fname, text in rendered.items()}
    record = {
        "version": __version__,
        "command": command,
        "config": config,
        "config_sha256": meta["config_sha256"],
        "grid": grid or {},
        "wall_clock_s": wall_clock_s,
        "outputs": checksums,
    }
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for fname, text in rendered.items():
        (out / fname).write_text(text)
    (out / "run.json").write_text(render_json(record))
    return checksums
