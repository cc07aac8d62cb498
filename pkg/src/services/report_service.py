"""
Report Service - Stable JSON/CSV/DOT result files and run manifests.

Result files never contain wall-clock data, so replaying a command with
the same options reproduces them byte for byte.
"""
import csv
import hashlib
import io
import json
import logging
from importlib import metadata
from pathlib import Path
from typing import Any, Literal, Sequence

from src.models.report import RunManifest

logger = logging.getLogger(__name__)

ReportFormat = Literal["json", "csv", "dot"]

# Packages whose versions go into every manifest
TRACKED_PACKAGES = ["numpy", "scipy", "networkx", "pydantic", "langgraph", "python-dotenv"]

# Fill colours for DOT output, by role prefix
ROLE_COLORS = {
    "r[": "tomato",
    "s[": "gold",
    "R[": "tomato",
    "v'": "lightskyblue",
    "v": "palegreen",
    "u[": "lightgrey",
    "w[": "plum",
}


class ReportError(Exception):
    """Raised when a result cannot be written in the requested format."""
    pass


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def stable_hash(value: Any) -> str:
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def role_color(role: str) -> str:
    """Fill colour for a role label; roots first, then the innermost segment."""
    if role[:2] in ("r[", "R["):
        return ROLE_COLORS["r["]
    leaf = role.rsplit("/", 1)[-1].rsplit(":", 1)[-1]
    for prefix in ("s[", "v'", "u[", "w["):
        if role.startswith(prefix) or leaf.startswith(prefix):
            return ROLE_COLORS[prefix]
    if leaf == "v":
        return ROLE_COLORS["v"]
    return "white"


def render_csv(rows: Sequence[dict[str, Any]], columns: Sequence[str] | None = None) -> str:
    """CSV text with a header row; columns default to the first row's keys."""
    if columns is None:
        columns = list(rows[0]) if rows else []
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def emit_report(
    out_dir: Path,
    stem: str,
    fmt: ReportFormat,
    payload: Any = None,
    rows: Sequence[dict[str, Any]] | None = None,
    columns: Sequence[str] | None = None,
    dot: str | None = None,
) -> Path:
    """
    Write one result file `<stem>.<fmt>` under out_dir.

    Args:
        out_dir: Output directory (created if missing)
        stem: File name without extension
        fmt: json, csv or dot
        payload: JSON-serialisable result (json)
        rows: Table rows (csv)
        columns: CSV header order
        dot: Rendered DOT text (dot)

    Returns:
        Path of the written file

    Raises:
        ReportError: If the result has no rendering in the requested format
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        if payload is None:
            raise ReportError(f"{stem} has no JSON rendering")
        text = json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    elif fmt == "csv":
        if rows is None:
            raise ReportError(f"{stem} is not tabular; use --format json")
        text = render_csv(rows, columns)
    elif fmt == "dot":
        if dot is None:
            raise ReportError(f"{stem} is not graph-like; DOT output is for graphs and gadgets")
        text = dot
    else:
        raise ReportError(f"unknown report format {fmt!r}")

    path = out_dir / f"{stem}.{fmt}"
    path.write_text(text, encoding="utf-8")
    logger.debug("wrote %s (%d bytes)", path, len(text))
    return path


def package_versions() -> dict[str, str]:
    versions = {}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "not installed"
    return versions


def write_manifest(out_dir: Path, command: Sequence[str], options: dict[str, Any], seed: int,
                   outputs: Sequence[Path], wall_time_s: float, exit_code: int) -> Path:
    """Write manifest.json with digests of every output file."""
    manifest = RunManifest(
        command=list(command),
        config_hash=stable_hash(options),
        seed=seed,
        versions=package_versions(),
        wall_time_s=round(wall_time_s, 3),
        exit_code=exit_code,
        outputs={Path(p).name: file_digest(p) for p in sorted(outputs, key=lambda p: Path(p).name)},
    )
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest.model_dump(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path
