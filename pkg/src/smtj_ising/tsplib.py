"""TSPLIB reader (NODE_COORD_SECTION, EUC_2D) and run-artifact persistence."""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import TsplibParseError, UnsupportedFormat
from .tsp import TspInstance

log = logging.getLogger(__name__)

SUPPORTED_WEIGHT_TYPES = ("EUC_2D",)
KNOWN_KEYWORDS = {"NAME", "TYPE", "COMMENT", "DIMENSION", "EDGE_WEIGHT_TYPE", "EDGE_WEIGHT_FORMAT",
                  "DISPLAY_DATA_TYPE", "NODE_COORD_TYPE", "CAPACITY"}
BUNDLED = ("burma14", "berlin52", "st70", "eil76", "eil101")
TRAJECTORY_HEADER = ("iteration", "c", "energy", "best_energy")


@dataclass(frozen=True)
class TsplibFile:
    name: str
    dimension: int
    edge_weight_type: str
    node_coords: np.ndarray  # rows of (id, x, y)
    comment: str = ""

    @property
    def coords(self):
        return self.node_coords[:, 1:]


_KEY = re.compile(r"^\s*([A-Z_]+)\s*:?\s*(.*?)\s*$")


def parse(text: str) -> TsplibFile:
    """Parse TSPLIB keyword text; tolerant of spacing around ':'."""
    header = {}
    coords = []
    in_coords = False
    saw_eof = False
    dim_line = None
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            saw_eof = True
            break
        if in_coords:
            parts = line.split()
            if parts[0][0].isdigit() or parts[0][0] in "+-.":
                if len(parts) != 3:
                    raise TsplibParseError(f"expected 'id x y', got {line!r}", lineno)
                try:
                    coords.append((int(parts[0]), float(parts[1]), float(parts[2])))
                except ValueError as exc:
                    raise TsplibParseError(f"bad coordinate record {line!r}", lineno) from exc
                continue
            in_coords = False
        if line.startswith("NODE_COORD_SECTION"):
            in_coords = True
            continue
        if line.endswith("_SECTION"):
            raise UnsupportedFormat(f"line {lineno}: section {line} is not supported")
        m = _KEY.match(line)
        if not m:
            raise TsplibParseError(f"cannot parse {line!r}", lineno)
        key, val = m.group(1), m.group(2)
        if key not in KNOWN_KEYWORDS:
            log.warning("line %d: ignoring unknown keyword %s", lineno, key)
        if key == "DIMENSION":
            dim_line = lineno
        header[key] = val
    n_lines = len(lines)
    if "DIMENSION" not in header:
        raise TsplibParseError("missing DIMENSION", n_lines)
    try:
        dim = int(header["DIMENSION"])
    except ValueError as exc:
        raise TsplibParseError("DIMENSION is not an integer", dim_line) from exc
    if not coords:
        raise TsplibParseError("missing NODE_COORD_SECTION", n_lines)
    if len(coords) != dim:
        what = "EOF" if not saw_eof else "coordinate records"
        raise TsplibParseError(
            f"NODE_COORD_SECTION has {len(coords)} of {dim} records (missing {what})", n_lines)
    if not saw_eof:
        raise TsplibParseError("file ends without EOF", n_lines)
    arr = np.array(coords, dtype=np.float64)
    if not np.array_equal(arr[:, 0], np.arange(1, dim + 1)):
        raise TsplibParseError(f"node ids must be 1..{dim} in order", n_lines)
    return TsplibFile(header.get("NAME", "unnamed"), dim, header.get("EDGE_WEIGHT_TYPE", "EUC_2D"), arr,
                      header.get("COMMENT", ""))


def read(path) -> TsplibFile:
    return parse(Path(path).read_text())


def bundled(name: str) -> TsplibFile:
    """One of the instances shipped with the package, e.g. 'st70'."""
    if name not in BUNDLED:
        raise FileNotFoundError(f"no bundled instance {name!r}; have {', '.join(BUNDLED)}")
    return parse(resources.files("smtj_ising").joinpath(f"data/{name}.tsp").read_text())


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("smtj_ising").joinpath(f"data/{name}.tsp")))


def nint(x):
    """TSPLIB nearest integer: floor(x + 0.5)."""
    return np.floor(np.asarray(x) + 0.5)


def to_instance(f: TsplibFile) -> TspInstance:
    if f.edge_weight_type not in SUPPORTED_WEIGHT_TYPES:
        raise UnsupportedFormat(f"EDGE_WEIGHT_TYPE {f.edge_weight_type} is not supported (EUC_2D only)")
    return TspInstance.from_coords(f.coords, name=f.name, rounding=True)


def load_instance(path_or_name) -> TspInstance:
    p = Path(str(path_or_name))
    if p.exists():
        return to_instance(read(p))
    return to_instance(bundled(str(path_or_name).removesuffix(".tsp")))


def dimension_of(path_or_name) -> int:
    """N from a file or bundled name; works for any EDGE_WEIGHT_TYPE."""
    p = Path(str(path_or_name))
    f = read(p) if p.exists() else bundled(str(path_or_name).removesuffix(".tsp"))
    return f.dimension


# ---------------------------------------------------------------------------
# run artifacts

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_trajectory_csv(trajectory, path):
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRAJECTORY_HEADER)
            for it, c, e, be in trajectory:
                w.writerow([int(it), repr(float(c)), repr(float(e)), repr(float(be))])
    except OSError as exc:
        raise OSError(f"cannot write trajectory to {path}: {exc}") from exc
    return path


def read_trajectory_csv(path):
    with Path(path).open() as fh:
        r = csv.reader(fh)
        header = tuple(next(r))
        if header != TRAJECTORY_HEADER:
            raise TsplibParseError(f"{path}: unexpected header {header}", 1)
        return [(int(a), float(b), float(c), float(d)) for a, b, c, d in r]


def write_run_artifact(doc: dict, path, trajectories: dict | None = None):
    """Write ``doc`` as JSON; each trajectory becomes a CSV next to it.

    ``trajectories`` maps a label to (iteration, c, energy, best_energy)
    rows; the JSON records the side-file names under "trajectory_files".
    """
    path = Path(path)
    doc = _jsonable(dict(doc))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if trajectories:
            files = {}
            for label, rows in trajectories.items():
                side = path.with_name(f"{path.stem}_{label}_trajectory.csv")
                write_trajectory_csv(rows, side)
                files[label] = side.name
            doc["trajectory_files"] = files
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write run artifact {path}: {exc}") from exc
    return path


def read_run_artifact(path) -> dict:
    return json.loads(Path(path).read_text())
