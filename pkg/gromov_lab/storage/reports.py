import io
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

import pandas as pd

from gromov_lab.schemas.report import DeviationReport, LatticeReport, RunManifest, SeriesPoint
from gromov_lab.storage.files import PathLike, atomic_write_text

DEVIATION_COLUMNS = ["s", "t", "lower", "upper", "exact", "target", "deviation"]
LATTICE_COLUMNS = ["t", "N", "Nprime", "ratio"]
SERIES_COLUMNS = ["k", "value", "lower_target", "upper_bound", "lower_proof", "nodes_explored"]


def frame_to_csv(frame: pd.DataFrame) -> str:
    """Header row, comma separator, '.' decimals, '\\n' line ends, blanks for missing."""
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n", na_rep="")
    return buffer.getvalue()


def records_to_csv(records: Sequence[Dict], columns: List[str]) -> str:
    return frame_to_csv(pd.DataFrame(list(records), columns=columns))


# -----------------------------
# Report types
# -----------------------------
def deviation_csv(report: DeviationReport) -> str:
    return records_to_csv([row.model_dump() for row in report.rows], DEVIATION_COLUMNS)


def lattice_csv(report: LatticeReport) -> str:
    """Rows t, N, Nprime, ratio; a trailing `witness_t,<t>,,` row when a witness exists."""
    body = records_to_csv([row.model_dump() for row in report.rows], LATTICE_COLUMNS)
    if report.witness_t is not None:
        body += f"witness_t,{report.witness_t!r},,\n"
    return body


def series_csv(series: Iterable[SeriesPoint]) -> str:
    return records_to_csv([point.model_dump() for point in series], SERIES_COLUMNS)


# -----------------------------
# Run manifest
# -----------------------------
def manifest_text(manifest: RunManifest) -> str:
    lines = [
        f"name: {manifest.name}",
        f"kind: {manifest.kind}",
        f"seed: {manifest.seed}",
        f"exit_status: {manifest.exit_status}",
        f"wall_time_s: {manifest.wall_time_s:.3f}",
        "[config]",
    ]
    lines.extend(f"{key} = {value}" for key, value in sorted(manifest.config.items()))
    lines.append("[versions]")
    lines.extend(f"{key} = {value}" for key, value in sorted(manifest.versions.items()))
    lines.append("[outputs]")
    lines.extend(manifest.outputs)
    return "\n".join(lines) + "\n"


def write_manifest(manifest: RunManifest, path: PathLike) -> Path:
    return atomic_write_text(path, manifest_text(manifest))
