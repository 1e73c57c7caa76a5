"""File formats: system JSON, trajectory/layout/report CSVs, atomic writes.

Floats are written with ``repr`` so every CSV value round-trips exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import EnvironmentTerm, GrowthSystem, Trajectory, random_uniform_w0
from .errors import InputError


def fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x) or math.isnan(x):
        return ""
    return repr(x)


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if math.isnan(x) or math.isinf(x) else x
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write_text(path, dumps_json(obj))


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    return atomic_write_text(path, csv_text(header, rows))


# -- system JSON ---------------------------------------------------------------

@dataclass(frozen=True)
class SystemSpec:
    system: GrowthSystem
    w0: np.ndarray
    w0_spec: object
    t_end: float | None = None
    dt: float | None = None

    def to_dict(self) -> dict:
        d = self.system.to_dict()
        d["w0"] = self.w0_spec
        if self.t_end is not None:
            d["t_end"] = self.t_end
        if self.dt is not None:
            d["dt"] = self.dt
        if self.system.allow_reducible:
            d["allow_reducible"] = True
        return d


def parse_system(doc: dict) -> SystemSpec:
    if not isinstance(doc, dict):
        raise InputError("system document must be a JSON object")
    for key in ("a", "coupling", "w0"):
        if key not in doc:
            raise InputError(f"system document is missing {key!r}")
    env = EnvironmentTerm.from_dict(doc.get("env", {"kind": "zero"}))
    try:
        system = GrowthSystem(doc["a"], doc["coupling"], env, bool(doc.get("allow_reducible", False)))
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid system: {exc}") from exc
    if "n" in doc and doc["n"] != system.n:
        raise InputError(f"n = {doc['n']} but a has {system.n} entries")
    spec = doc["w0"]
    if isinstance(spec, dict):
        ru = spec.get("random_uniform")
        if not isinstance(ru, dict):
            raise InputError("w0 object must be {'random_uniform': {lo, hi, seed}}")
        w0 = random_uniform_w0(system.n, float(ru.get("lo", 0.5)), float(ru.get("hi", 1.5)),
                               ru.get("seed", 0))
    else:
        w0 = np.array(spec, dtype=float)
        if w0.shape != (system.n,):
            raise InputError(f"w0 has {w0.size} entries, expected {system.n}")
        if np.any(w0 <= 0):
            raise InputError("w0 must be strictly positive")
    t_end = doc.get("t_end")
    dt = doc.get("dt")
    return SystemSpec(system, w0, spec,
                      None if t_end is None else float(t_end), None if dt is None else float(dt))


def load_system(path) -> SystemSpec:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    return parse_system(doc)


# -- trajectories --------------------------------------------------------------

def trajectory_csv(trajectory: Trajectory) -> str:
    header = ["t"] + [f"w_{i + 1}" for i in range(trajectory.n)]
    rows = ([fmt(t)] + [fmt(x) for x in w] for t, w in zip(trajectory.times, trajectory.w))
    return csv_text(header, rows)


def write_trajectory(path, trajectory: Trajectory) -> Path:
    return atomic_write_text(path, trajectory_csv(trajectory))


def read_trajectory(path, step: float | None = None) -> Trajectory:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != ["t"]:
        raise InputError(f"{path}: expected header 't,w_1,...,w_n'")
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if data.ndim != 2 or data.shape[0] < 2:
        raise InputError(f"{path}: need at least two samples")
    times = data[:, 0]
    if step is None:
        step = float(times[1] - times[0])
    return Trajectory(times, data[:, 1:], step)


# -- spatial and report tables ------------------------------------------------

def layout_csv(layout) -> str:
    rows = ([i, fmt(p[0]), fmt(p[1]), fmt(a)]
            for i, p, a in zip(layout.labels(), layout.positions, layout.areas))
    return csv_text(["id", "x_km", "y_km", "area_km2"], rows)


def write_layout(path, layout) -> Path:
    return atomic_write_text(path, layout_csv(layout))


def read_layout(path):
    from .spatial import SpatialLayout

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"id", "x_km", "y_km", "area_km2"} - set(reader.fieldnames or ())
        if missing:
            raise InputError(f"{path}: missing columns {sorted(missing)}")
        ids, pos, areas = [], [], []
        for line, row in enumerate(reader, start=2):
            try:
                pos.append((float(row["x_km"]), float(row["y_km"])))
                areas.append(float(row["area_km2"]))
            except ValueError as exc:
                raise InputError(f"{path}:{line}: {exc}") from exc
            ids.append(row["id"])
    return SpatialLayout(np.array(pos).reshape(-1, 2), np.array(areas), tuple(ids))


def moran_csv(curve) -> str:
    """Gaps (degenerate bands) keep their row with an empty I field."""
    rows = ([fmt(p.band_lo), fmt(p.band_hi), p.pairs, fmt(p.value)] for p in curve)
    return csv_text(["band_lo_km", "band_hi_km", "pairs", "I"], rows)


def crossing_csv(ids, crossing) -> str:
    """Units that never cross get an empty crossing_time."""
    return csv_text(["id", "crossing_time"], ([i, fmt(t)] for i, t in zip(ids, crossing)))


def histogram_csv(hist) -> str:
    rows = ([fmt(lo), fmt(hi), int(c)] for lo, hi, c in zip(hist.edges[:-1], hist.edges[1:], hist.counts))
    return csv_text(["bin_lo", "bin_hi", "count"], rows)


def growth_rates_csv(rates) -> str:
    header = ["t"] + [f"g_{i + 1}" for i in range(rates.rates.shape[1])]
    rows = ([fmt(t)] + [fmt(g) for g in row] for t, row in zip(rates.times, rates.rates))
    return csv_text(header, rows)


def dispersion_csv(disp) -> str:
    rows = ([fmt(t), fmt(s), fmt(r)] for t, s, r in zip(disp.times, disp.log_std, disp.spread))
    return csv_text(["t", "log_std", "max_minus_min"], rows)
