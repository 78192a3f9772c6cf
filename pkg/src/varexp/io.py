"""Report, manifest and trajectory persistence."""

from __future__ import annotations

import json
from collections.abc import Sequence
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from varexp import __version__
from varexp.fde.scheme import FdeTrajectory
from varexp.grid import Grid, write_csv

Reportable = BaseModel | Sequence[BaseModel] | dict[str, Any]


def to_jsonable(report: Reportable) -> Any:
    if isinstance(report, BaseModel):
        return report.model_dump(mode="json")
    if isinstance(report, dict):
        return {k: _jsonable_item(v) for k, v in report.items()}
    return [_jsonable_item(item) for item in report]


def _jsonable_item(value: Any) -> Any:
    if isinstance(value, (BaseModel, list, dict)):
        return to_jsonable(value)
    return value


def dumps_report(report: Reportable) -> str:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"


def write_report(report: Reportable, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(report))
    return path


def write_manifest(
    out_dir: str | Path,
    command: str,
    config_sha256: str | list[str] | None,
    artifacts: Sequence[Path],
) -> Path:
    """manifest.json: the only artifact carrying a timestamp.

    Commands reading two configs record both digests, in argument order.
    """
    out = Path(out_dir)
    manifest = {
        "command": command,
        "config_sha256": config_sha256,
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "artifacts": sorted(str(Path(a).relative_to(out)) for a in artifacts),
    }
    path = out / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path


def write_trajectory(traj: FdeTrajectory, out_dir: str | Path, prefix: str = "") -> list[Path]:
    """Per-step CSVs (x, v_n), the two barriers and a trajectory summary JSON."""
    out = Path(out_dir)
    width = max(4, len(str(len(traj.steps) - 1)))
    paths = [
        write_csv(v, out / f"{prefix}step_{n:0{width}d}.csv") for n, v in enumerate(traj.steps)
    ]
    paths.append(write_csv(traj.sub.solution, out / f"{prefix}subsolution.csv"))
    paths.append(write_csv(traj.sup.solution, out / f"{prefix}supersolution.csv"))
    paths.append(write_report(traj.summary(), out / f"{prefix}trajectory.json"))
    return paths


def write_cell_table(
    grid: Grid, columns: dict[str, Sequence[float]], path: str | Path
) -> Path:
    """Per-cell CSV keyed by cell centre, e.g. the Picone lhs/rhs/gap arrays."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        path,
        np.column_stack([grid.centers, *(np.asarray(c, dtype=float) for c in columns.values())]),
        delimiter=",",
        header=",".join(["x", *columns]),
        comments="",
        fmt="%.17g",
    )
    return path
