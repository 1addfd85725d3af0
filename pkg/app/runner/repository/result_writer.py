import csv
import io
import json
import math
import os
import subprocess
import tempfile
from collections.abc import Iterable, Sequence
from importlib import metadata
from pathlib import Path
from typing import Any

import numpy as np

from app.postproc.entities.entity import STRESS_NAMES, SampledFields
from pkg.log.logger import Logger

FIELD_COLUMNS = (
    ["element", "xi1", "xi2", "x1", "x2", "u1", "u2"]
    + list(STRESS_NAMES)
    + ["omega", "f1", "f2", "r1", "r2"]
)


def format_value(value: Any) -> str:
    """17 significant digits for floats so identical runs give identical files"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_safe(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def build_id() -> str:
    """Short git revision of the working tree, or the package version outside a checkout"""
    try:
        rev = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            capture_output=True,
            text=True,
            check=True,
            timeout=5,
            cwd=Path(__file__).resolve().parent,
        ).stdout.strip()
        if rev:
            return f"git-{rev}"
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        return f"equilibrium-sem-{metadata.version('equilibrium-sem')}"
    except metadata.PackageNotFoundError:
        return "equilibrium-sem-unversioned"


class ResultWriter:
    """Writes CSV tables and JSON summaries atomically under one output directory"""

    def __init__(self, logger: Logger) -> None:
        self.logger = logger

    def _atomic_write(self, path: Path, text: str) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            os.replace(tmp, path)
        except Exception as e:
            self.logger.error(f"Error writing {path}: {e!s}")
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        self.logger.info("Wrote result file", extra={"path": str(path)})
        return path

    def write_json(self, path: str | Path, data: dict[str, Any]) -> Path:
        text = json.dumps(_json_safe(data), indent=2, sort_keys=True, allow_nan=False) + "\n"
        return self._atomic_write(Path(path), text)

    def write_csv(self, path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
        return self._atomic_write(Path(path), buffer.getvalue())

    def write_fields(self, path: str | Path, fields: SampledFields) -> Path:
        grid = fields.grid
        rows = []
        for e in range(fields.n_elements):
            for k in range(grid.size):
                rows.append(
                    [e, grid.xi1[k], grid.xi2[k], *fields.x[e, k], *fields.displacement[e, k], *fields.stress[e, k],
                     fields.rotation[e, k], *fields.body_force[e, k], *fields.residual[e, k]]
                )
        return self.write_csv(path, FIELD_COLUMNS, rows)
