"""Snapshots, trajectories, time series and transform frames on disk.

Floats are written with 17 significant digits, which is enough for every
double to parse back to the same bits, so snapshot value arrays round-trip
losslessly.  Keys are sorted and no wall-clock data is written, so equal
inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .grids import GraphGrid, RadialProfile, State
from .interface import estimate_Tstar
from .params import FlowParams

SNAPSHOT_VERSION = 1
TIMESERIES_COLUMNS = ("t", "apex_height", "flat_volume", "inner_radius", "outer_radius", "Tstar_estimate")


class SnapshotError(ValueError):
    """A snapshot or frame file that does not match the expected layout."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise SnapshotError(f"non-finite value {x!r} cannot be serialized")
    text = format(x, ".17g")
    # keep a decimal point so -0.0 and integral values parse back as floats
    return text if any(c in text for c in ".en") else text + ".0"


def dumps(obj) -> str:
    """Compact JSON with sorted keys and 17-digit floats."""
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k) + ":" + dumps(v) for k, v in items) + "}"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if hasattr(obj, "to_dict"):
        return dumps(obj.to_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise SnapshotError(f"{where}: missing key {key!r}", key=key)
    return d[key]


# ---------------------------------------------------------------------------
# snapshots


def snapshot_dict(state: State, params: FlowParams | None = None, meta: dict | None = None) -> dict:
    return {
        "schema_version": SNAPSHOT_VERSION,
        "frame": "height",
        "grid": state.descriptor(),
        "time": float(state.time),
        "values": np.asarray(state.values, dtype=float),
        "params": None if params is None else params.to_dict(),
        "meta": meta or {},
    }


def state_from_dict(d: dict) -> tuple[State, FlowParams | None, dict]:
    version = _require(d, "schema_version", "snapshot")
    if version != SNAPSHOT_VERSION:
        raise SnapshotError(f"snapshot schema_version {version!r} != {SNAPSHOT_VERSION}", key="schema_version")
    frame = d.get("frame", "height")
    if frame != "height":
        raise SnapshotError(f"expected a height snapshot, got frame {frame!r}", key="frame")
    grid = _require(d, "grid", "snapshot")
    kind = _require(grid, "kind", "snapshot grid")
    values = np.asarray(_require(d, "values", "snapshot"), dtype=float)
    time = float(_require(d, "time", "snapshot"))
    if kind not in ("radial", "cartesian"):
        raise SnapshotError(f"unknown grid kind {kind!r}", key="grid.kind")
    try:
        if kind == "radial":
            state: State = RadialProfile(float(_require(grid, "rho_max", "snapshot grid")), values, time)
        else:
            state = GraphGrid(float(_require(grid, "lo", "snapshot grid")),
                              float(_require(grid, "hi", "snapshot grid")), values, time)
    except SnapshotError:
        raise
    except ValueError as exc:
        raise SnapshotError(f"snapshot values do not fit the grid: {exc}", key="values") from exc
    if state.cells != int(_require(grid, "cells", "snapshot grid")):
        raise SnapshotError("value array does not match grid.cells", key="grid.cells")
    params = d.get("params")
    return state, (None if params is None else FlowParams.from_dict(params)), d.get("meta") or {}


def save_snapshot(path: str | Path, state: State, params: FlowParams | None = None, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(snapshot_dict(state, params, meta)) + "\n")
    return path


def load_snapshot(path: str | Path) -> tuple[State, FlowParams | None, dict]:
    """Read a snapshot file; a JSONL trajectory yields its last snapshot."""
    text = Path(path).read_text().strip()
    if not text:
        raise SnapshotError(f"{path}: empty file")
    return state_from_dict(json.loads(text.splitlines()[-1]))


def resume_snapshot(path: str | Path) -> State:
    """State to continue a run from (the last snapshot of a file)."""
    return load_snapshot(path)[0]


# ---------------------------------------------------------------------------
# trajectories and time series


def write_trajectory(traj, params: FlowParams, path: str | Path) -> Path:
    """One snapshot per line, with its interface measurements under ``meta``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [dumps(snapshot_dict(s, params, {"interface": it.to_dict()}))
             for s, it in zip(traj.states, traj.interfaces)]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_trajectory(path: str | Path) -> tuple[list[State], FlowParams | None]:
    states, params = [], None
    for line in Path(path).read_text().splitlines():
        if line.strip():
            s, p, _ = state_from_dict(json.loads(line))
            states.append(s)
            params = params or p
    if not states:
        raise SnapshotError(f"{path}: no snapshots")
    return states, params


def timeseries_rows(traj, vol_floor: float = 0.0) -> list[dict]:
    tstar = estimate_Tstar(traj.interfaces, vol_floor)
    return [{
        "t": s.time,
        "apex_height": s.apex_height(),
        "flat_volume": it.flat_volume,
        "inner_radius": it.inner_radius,
        "outer_radius": it.outer_radius,
        "Tstar_estimate": tstar,
    } for s, it in zip(traj.states, traj.interfaces)]


def write_timeseries(traj, path: str | Path, vol_floor: float = 0.0) -> Path:
    """CSV with one row per snapshot; ``Tstar_estimate`` is empty until the flat side vanishes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TIMESERIES_COLUMNS)
        for row in timeseries_rows(traj, vol_floor):
            writer.writerow(["" if row[c] is None else format_float(row[c]) for c in TIMESERIES_COLUMNS])
    return path


def read_timeseries(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TIMESERIES_COLUMNS:
            raise SnapshotError(f"unexpected time-series columns {reader.fieldnames}")
        return [{k: (None if v == "" else float(v)) for k, v in row.items()} for row in reader]


# ---------------------------------------------------------------------------
# transform frames


def frame_dict(frame) -> dict:
    """Tagged dictionary for a pressure, Legendre, hodograph or rescaled-profile frame."""
    from .transforms.hodograph import HodographPatch
    from .transforms.legendre import LegendreField
    from .transforms.pressure import PressureField
    from .transforms.zeta import RescaledProfile

    base = {"schema_version": SNAPSHOT_VERSION}
    if isinstance(frame, PressureField):
        return {**base, "frame": "pressure", "grid": frame.grid.descriptor(), "time": frame.time,
                "sigma_p": frame.sigma_p, "values": frame.g}
    if isinstance(frame, LegendreField):
        return {**base, "frame": "legendre", "theta": frame.theta, "r": frame.r, "time": frame.time,
                "center_mass": frame.center_mass, "n": frame.n, "values": frame.u}
    if isinstance(frame, HodographPatch):
        return {**base, "frame": "hodograph", "y_prime": frame.y_prime, "z": frame.z, "anchor": frame.anchor,
                "normal": frame.normal, "eta": frame.eta, "spacing": frame.spacing, "time": frame.time,
                "shrinks": frame.shrinks, "values": frame.h}
    if isinstance(frame, RescaledProfile):
        return {**base, "frame": "zeta", "theta": frame.theta, "s": frame.s, "time": frame.time,
                "sigma_p": frame.sigma_p, "n": frame.n, "values": frame.zeta}
    raise TypeError(f"not a transform frame: {type(frame).__name__}")


def frame_from_dict(d: dict):
    from .transforms.hodograph import HodographPatch
    from .transforms.legendre import LegendreField, PolarGrid
    from .transforms.pressure import PressureField
    from .transforms.zeta import RescaledProfile

    tag = _require(d, "frame", "frame")
    arr = lambda key: np.asarray(_require(d, key, tag), dtype=float)  # noqa: E731
    if tag == "height":
        return state_from_dict(d)[0]
    if tag == "pressure":
        grid_state = state_from_dict({**d, "frame": "height"})[0]
        return PressureField(grid_state, float(d["sigma_p"]))
    if tag == "legendre":
        grid = PolarGrid(arr("theta"), arr("r"))
        return LegendreField(grid, arr("values"), float(d["center_mass"]), float(d["time"]), int(d["n"]))
    if tag == "hodograph":
        return HodographPatch(arr("y_prime"), arr("z"), arr("values"), arr("anchor"), arr("normal"),
                              float(d["eta"]), float(d["spacing"]), float(d["time"]), int(d["shrinks"]))
    if tag == "zeta":
        return RescaledProfile(arr("theta"), arr("s"), arr("values"), float(d["time"]), float(d["sigma_p"]),
                               int(d["n"]))
    raise SnapshotError(f"unknown frame tag {tag!r}", key="frame")


def save_frame(path: str | Path, frame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(frame_dict(frame)) + "\n")
    return path


def load_frame(path: str | Path):
    return frame_from_dict(json.loads(Path(path).read_text()))
