"""County panel data: per-unit attributes plus a long-format activity table.

Two CSV files make up a panel::

    attributes.csv  id,x_km,y_km,area_km2,education_years,density
    activity.csv    id,year,activity

Attribute fields may be left empty (read as NaN; the layout is only built when
every row has coordinates and an area). Years a county does not report are
gaps (NaN), never zeros.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import Trajectory
from .errors import DegenerateError, InputError
from .formats import atomic_write_text, csv_text, fmt
from .spatial import SpatialLayout
from .stats import partial_correlation, pearson

ATTRIBUTE_COLUMNS = ("id", "x_km", "y_km", "area_km2", "education_years", "density")
ACTIVITY_COLUMNS = ("id", "year", "activity")


@dataclass(frozen=True)
class CountyPanel:
    ids: tuple[str, ...]
    years: np.ndarray
    activity: np.ndarray  # (n, T), NaN where missing
    education: np.ndarray
    density: np.ndarray
    layout: SpatialLayout | None = None

    def __post_init__(self):
        ids = tuple(str(i) for i in self.ids)
        if len(set(ids)) != len(ids):
            raise InputError("duplicate county ids")
        years = np.asarray(self.years, dtype=int)
        if np.any(np.diff(years) <= 0):
            raise InputError("years must be strictly increasing")
        act = np.asarray(self.activity, dtype=float)
        if act.shape != (len(ids), years.size):
            raise InputError(f"activity must be {len(ids)}x{years.size}, got {act.shape}")
        if np.any(act[~np.isnan(act)] < 0):
            raise InputError("activity must be non-negative")
        for name in ("education", "density"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (len(ids),):
                raise InputError(f"{name} must have one entry per county")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "activity", act)

    @property
    def n(self) -> int:
        return len(self.ids)


def _float_or_nan(text: str) -> float:
    text = text.strip()
    return math.nan if text == "" else float(text)


def _read_rows(path: Path, columns) -> list[tuple[int, dict]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in columns if c not in header]
        if missing:
            raise InputError(f"{path}: header is missing column(s) {missing}")
        return [(line, row) for line, row in enumerate(reader, start=2)]


def load_panel(path, activity_path=None) -> CountyPanel:
    """Read a panel from a directory holding attributes.csv and activity.csv, or from two paths."""
    path = Path(path)
    if path.is_dir():
        attr_path, act_path = path / "attributes.csv", path / "activity.csv"
    else:
        if activity_path is None:
            raise InputError("give a panel directory or both the attributes and activity files")
        attr_path, act_path = path, Path(activity_path)
    for p in (attr_path, act_path):
        if not p.exists():
            raise InputError(f"{p}: no such file")

    ids, xs, ys, areas, edu, dens = [], [], [], [], [], []
    for line, row in _read_rows(attr_path, ATTRIBUTE_COLUMNS):
        cid = (row["id"] or "").strip()
        if not cid:
            raise InputError(f"{attr_path}:{line}: empty id")
        if cid in ids:
            raise InputError(f"{attr_path}:{line}: duplicate id {cid!r}")
        vals = []
        for col in ATTRIBUTE_COLUMNS[1:]:
            try:
                vals.append(_float_or_nan(row[col] or ""))
            except ValueError:
                raise InputError(f"{attr_path}:{line}: column {col!r} is not a number: {row[col]!r}") from None
        ids.append(cid)
        for dest, v in zip((xs, ys, areas, edu, dens), vals):
            dest.append(v)

    index = {cid: k for k, cid in enumerate(ids)}
    cells = {}
    for line, row in _read_rows(act_path, ACTIVITY_COLUMNS):
        cid = (row["id"] or "").strip()
        if cid not in index:
            raise InputError(f"{act_path}:{line}: id {cid!r} is not in {attr_path.name}")
        try:
            year = int(row["year"])
        except ValueError:
            raise InputError(f"{act_path}:{line}: column 'year' is not an integer: {row['year']!r}") from None
        try:
            value = float(row["activity"])
        except ValueError:
            raise InputError(f"{act_path}:{line}: column 'activity' is not a number: {row['activity']!r}") from None
        if not value >= 0:
            raise InputError(f"{act_path}:{line}: column 'activity' must be non-negative, got {value!r}")
        if (cid, year) in cells:
            raise InputError(f"{act_path}:{line}: duplicate entry for id {cid!r}, year {year}")
        cells[(cid, year)] = value

    years = sorted({y for _, y in cells})
    col = {y: k for k, y in enumerate(years)}
    act = np.full((len(ids), len(years)), np.nan)
    for (cid, year), v in cells.items():
        act[index[cid], col[year]] = v

    layout = None
    geo = np.array([xs, ys, areas], dtype=float).reshape(3, -1)
    if ids and not np.isnan(geo).any():
        layout = SpatialLayout(geo[:2].T, geo[2], tuple(ids))
    return CountyPanel(tuple(ids), np.array(years, dtype=int), act, np.array(edu), np.array(dens), layout)


def panel_csv(panel: CountyPanel) -> tuple[str, str]:
    """Text of attributes.csv and activity.csv; missing activity cells are left out."""
    if panel.layout is not None:
        geo = np.column_stack([panel.layout.positions, panel.layout.areas])
    else:
        geo = np.full((panel.n, 3), np.nan)
    attr_rows = ([cid, *(fmt(v) for v in g), fmt(e), fmt(d)]
                 for cid, g, e, d in zip(panel.ids, geo, panel.education, panel.density))
    act_rows = ([cid, int(y), fmt(panel.activity[i, k])]
                for i, cid in enumerate(panel.ids)
                for k, y in enumerate(panel.years)
                if not np.isnan(panel.activity[i, k]))
    return csv_text(ATTRIBUTE_COLUMNS, attr_rows), csv_text(ACTIVITY_COLUMNS, act_rows)


def save_panel(panel: CountyPanel, directory) -> tuple[Path, Path]:
    directory = Path(directory)
    attributes, activity = panel_csv(panel)
    return (atomic_write_text(directory / "attributes.csv", attributes),
            atomic_write_text(directory / "activity.csv", activity))


def panel_from_trajectory(trajectory: Trajectory, education, density, layout: SpatialLayout | None = None,
                          every: float = 12.0, first_year: int = 1989, ids=None) -> CountyPanel:
    """Sample a trajectory every ``every`` time units into a yearly panel."""
    stride = every / trajectory.step
    if abs(stride - round(stride)) > 1e-9 * stride or round(stride) < 1:
        raise InputError("sampling interval must be a multiple of the trajectory step")
    idx = np.arange(0, len(trajectory), int(round(stride)))
    ids = ids or (layout.labels() if layout is not None else tuple(str(i + 1) for i in range(trajectory.n)))
    years = first_year + np.arange(idx.size)
    return CountyPanel(tuple(ids), years, trajectory.w[idx].T, education, density, layout)


@dataclass(frozen=True)
class YearCorrelation:
    year: int
    count: int
    r_education: float
    r_density: float
    partial_education: float  # activity ~ education, density partialled out
    partial_density: float    # activity ~ density, education partialled out


def yearly_correlation_report(panel: CountyPanel) -> list[YearCorrelation]:
    """Per-year Pearson and partial correlations of activity with education and density.

    Each year uses the counties with all three values present.
    """
    out = []
    for k, year in enumerate(panel.years):
        act = panel.activity[:, k]
        ok = ~(np.isnan(act) | np.isnan(panel.education) | np.isnan(panel.density))
        x, e, d = act[ok], panel.education[ok], panel.density[ok]
        try:
            row = YearCorrelation(int(year), int(ok.sum()), pearson(x, e), pearson(x, d),
                                  partial_correlation(x, e, d), partial_correlation(x, d, e))
        except (DegenerateError, InputError) as exc:
            raise type(exc)(f"year {year}: {exc}") from exc
        out.append(row)
    return out
