"""Gridded time-series ingest: file loading, reflectivity conversion, masking."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from shapely import contains_xy
from shapely.geometry import Polygon

UNITS = ("dBZ", "mm_per_hour")
_FIXED_COLUMNS = ["id", "x_km", "y_km", "lat", "lon", "units"]


class GridFormatError(ValueError):
    """Raised when a grid or mask file does not follow the expected layout."""

    def __init__(self, message, row=None, field=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.field = field


class EmptySelectionError(ValueError):
    """Raised when masking leaves no cells."""


@dataclass(frozen=True)
class GridCell:
    id: int
    x_km: float
    y_km: float
    lat: float
    lon: float
    series: np.ndarray


@dataclass(eq=False)
class GridSeries:
    """Nodes of a cartesian grid, each with a position and a time series.

    Arrays are stored column-wise; ``values`` has shape ``(n_cells, n_times)``.
    Cell ids are always ``0..n_cells-1`` in row order.
    """

    x_km: np.ndarray
    y_km: np.ndarray
    lat: np.ndarray
    lon: np.ndarray
    values: np.ndarray
    units: str = "mm_per_hour"
    time_step_minutes: float = 10.0
    flagged: np.ndarray = field(default=None)

    def __post_init__(self):
        self.x_km = np.asarray(self.x_km, dtype=float)
        self.y_km = np.asarray(self.y_km, dtype=float)
        self.lat = np.asarray(self.lat, dtype=float)
        self.lon = np.asarray(self.lon, dtype=float)
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        n = self.values.shape[0]
        if n == 0:
            raise ValueError("a grid needs at least one cell")
        if self.values.shape[1] < 2:
            raise ValueError("series length must be at least 2")
        for name in ("x_km", "y_km", "lat", "lon"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have one entry per cell")
        if self.units not in UNITS:
            raise ValueError(f"units must be one of {UNITS}, got {self.units!r}")
        if not self.time_step_minutes > 0:
            raise ValueError("time_step_minutes must be positive")
        coords = set(zip(self.x_km.tolist(), self.y_km.tolist()))
        if len(coords) != n:
            raise ValueError("(x_km, y_km) positions must be unique")
        if self.flagged is None:
            self.flagged = constant_series_mask(self.values)
        else:
            self.flagged = np.asarray(self.flagged, dtype=bool)

    @property
    def n_cells(self) -> int:
        return self.values.shape[0]

    @property
    def n_times(self) -> int:
        return self.values.shape[1]

    @property
    def ids(self) -> np.ndarray:
        return np.arange(self.n_cells)

    @property
    def cells(self) -> Iterator[GridCell]:
        for i in range(self.n_cells):
            yield GridCell(i, self.x_km[i], self.y_km[i], self.lat[i],
                           self.lon[i], self.values[i])

    def subset(self, index) -> "GridSeries":
        index = np.asarray(index)
        return GridSeries(self.x_km[index], self.y_km[index], self.lat[index],
                          self.lon[index], self.values[index], self.units,
                          self.time_step_minutes)

    def __eq__(self, other):
        if not isinstance(other, GridSeries):
            return NotImplemented
        return (self.units == other.units
                and self.time_step_minutes == other.time_step_minutes
                and all(np.array_equal(getattr(self, a), getattr(other, a))
                        for a in ("x_km", "y_km", "lat", "lon", "values")))


def constant_series_mask(values):
    """Boolean mask of rows whose series has zero range."""
    values = np.atleast_2d(values)
    return values.max(axis=1) == values.min(axis=1)


@dataclass(frozen=True)
class RegionMask:
    """Either a closed (lat, lon) ring or an explicit list of cell ids."""

    polygon: tuple = None
    cell_ids: tuple = None

    def __post_init__(self):
        if (self.polygon is None) == (self.cell_ids is None):
            raise ValueError("give exactly one of polygon or cell_ids")
        if self.polygon is not None:
            ring = tuple(tuple(map(float, v)) for v in self.polygon)
            if len(ring) < 4:
                raise ValueError("polygon ring needs at least 4 vertices (closed)")
            if ring[0] != ring[-1]:
                raise ValueError("polygon ring must be closed (first vertex = last)")
            object.__setattr__(self, "polygon", ring)
        else:
            object.__setattr__(self, "cell_ids", tuple(int(i) for i in self.cell_ids))

    def contains(self, grid: GridSeries) -> np.ndarray:
        """Which cells of ``grid`` lie strictly inside the mask."""
        if self.cell_ids is not None:
            keep = np.zeros(grid.n_cells, dtype=bool)
            ids = np.asarray(self.cell_ids, dtype=int)
            ids = ids[(ids >= 0) & (ids < grid.n_cells)]
            keep[ids] = True
            return keep
        # shapely x = lon, y = lat; contains() excludes the boundary
        poly = Polygon([(lon, lat) for lat, lon in self.polygon])
        return np.asarray(contains_xy(poly, grid.lon, grid.lat), dtype=bool)


def dbz_to_rain_rate(dbz, a=200.0, b=1.6):
    """Rain rate in mm/h from reflectivity in dBZ via Z = a * R**b.

    Works on scalars and arrays. The defaults are the Marshall-Palmer
    coefficients.
    """
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    z = np.power(10.0, np.asarray(dbz, dtype=float) / 10.0)
    rate = np.power(z / a, 1.0 / b)
    return float(rate) if np.ndim(rate) == 0 else rate


def apply_mask_and_filter(grid: GridSeries, mask: RegionMask | None = None,
                          min_rate_mm_h: float = 1.0, a: float = 200.0,
                          b: float = 1.6) -> GridSeries:
    """Keep cells inside ``mask`` and zero samples at or below ``min_rate_mm_h``.

    dBZ grids are converted to mm/h first. Surviving cells are re-indexed
    in their original order; cells whose filtered series is constant end up
    in ``flagged`` on the result.
    """
    keep = np.ones(grid.n_cells, dtype=bool) if mask is None else mask.contains(grid)
    if not keep.any():
        raise EmptySelectionError("mask excludes every cell")
    values = grid.values[keep]
    if grid.units == "dBZ":
        values = dbz_to_rain_rate(values, a, b)
    values = np.where(values > min_rate_mm_h, values, 0.0)
    return GridSeries(grid.x_km[keep], grid.y_km[keep], grid.lat[keep],
                      grid.lon[keep], values, "mm_per_hour",
                      grid.time_step_minutes)


def _parse_float(text, row, name):
    try:
        return float(text)
    except ValueError:
        raise GridFormatError(f"not a number: {text!r}", row=row, field=name) from None


def read_grid_csv(source, time_step_minutes: float = 10.0) -> GridSeries:
    """Parse the ``id,x_km,y_km,lat,lon,units,t0,...`` CSV layout."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    if not text.strip():
        raise GridFormatError("empty input")
    reader = csv.reader(io.StringIO(text, newline=""))
    header = [h.strip() for h in next(reader)]
    if header[:6] != _FIXED_COLUMNS:
        raise GridFormatError(f"header must start with {','.join(_FIXED_COLUMNS)}",
                              row=1)
    time_cols = header[6:]
    if time_cols != [f"t{k}" for k in range(len(time_cols))]:
        raise GridFormatError("time columns must be t0,t1,...", row=1)
    if len(time_cols) < 2:
        raise GridFormatError("need at least two time columns", row=1)

    ids, coords, series = [], [], []
    units = None
    seen = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise GridFormatError(
                f"expected {len(header)} fields, got {len(row)} (ragged series length)",
                row=lineno)
        try:
            cid = int(row[0])
        except ValueError:
            raise GridFormatError(f"bad id {row[0]!r}", row=lineno, field="id") from None
        x, y, lat, lon = (_parse_float(row[k], lineno, header[k]) for k in range(1, 5))
        u = row[5].strip()
        if u not in UNITS:
            raise GridFormatError(f"unknown units {u!r}", row=lineno, field="units")
        if units is None:
            units = u
        elif u != units:
            raise GridFormatError("units differ between rows", row=lineno, field="units")
        if (x, y) in seen:
            raise GridFormatError(f"duplicate coordinates, first seen on row {seen[(x, y)]}",
                                  row=lineno, field="x_km,y_km")
        seen[(x, y)] = lineno
        ids.append(cid)
        coords.append((x, y, lat, lon))
        series.append([_parse_float(v, lineno, header[6 + k])
                       for k, v in enumerate(row[6:])])
    if not ids:
        raise GridFormatError("no data rows")
    if sorted(ids) != list(range(len(ids))):
        raise GridFormatError("ids must be contiguous from 0", field="id")
    order = np.argsort(ids, kind="stable")
    coords = np.asarray(coords)[order]
    values = np.asarray(series)[order]
    return GridSeries(coords[:, 0], coords[:, 1], coords[:, 2], coords[:, 3],
                      values, units, time_step_minutes)


def write_grid_csv(grid: GridSeries, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_FIXED_COLUMNS + [f"t{k}" for k in range(grid.n_times)])
        for i in range(grid.n_cells):
            w.writerow([i, repr(grid.x_km[i].item()), repr(grid.y_km[i].item()),
                        repr(grid.lat[i].item()), repr(grid.lon[i].item()), grid.units]
                       + [repr(v) for v in grid.values[i].tolist()])


_NPZ_KEYS = ("x_km", "y_km", "lat", "lon", "values", "units", "time_step_minutes")


def read_grid_npz(path) -> GridSeries:
    """Binary layout: an ``.npz`` archive holding the GridSeries arrays."""
    try:
        with np.load(path, allow_pickle=False) as data:
            missing = [k for k in _NPZ_KEYS if k not in data]
            if missing:
                raise GridFormatError(f"missing arrays: {', '.join(missing)}")
            arrays = {k: data[k] for k in _NPZ_KEYS}
    except (OSError, ValueError) as exc:
        if isinstance(exc, GridFormatError):
            raise
        raise GridFormatError(f"not a readable npz archive: {exc}") from None
    values = arrays["values"]
    if values.ndim != 2:
        raise GridFormatError("values must be a 2-D array", field="values")
    if values.shape[0] == 0:
        raise GridFormatError("empty input")
    try:
        return GridSeries(arrays["x_km"], arrays["y_km"], arrays["lat"], arrays["lon"],
                          values, str(arrays["units"]),
                          float(arrays["time_step_minutes"]))
    except ValueError as exc:
        raise GridFormatError(str(exc)) from None


def write_grid_npz(grid: GridSeries, path) -> None:
    np.savez(path, x_km=grid.x_km, y_km=grid.y_km, lat=grid.lat, lon=grid.lon,
             values=grid.values, units=np.array(grid.units),
             time_step_minutes=np.array(grid.time_step_minutes))


def load_grid(path, format: str = "csv", time_step_minutes: float = 10.0) -> GridSeries:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if format == "csv":
        return read_grid_csv(path, time_step_minutes)
    if format == "binary":
        return read_grid_npz(path)
    raise ValueError(f"unknown grid format {format!r}")


def load_mask(path) -> RegionMask:
    """Read a GeoJSON Polygon (single ring) or a text file of cell ids."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() in (".json", ".geojson") or text.lstrip().startswith("{"):
        obj = json.loads(text)
        if obj.get("type") == "FeatureCollection":
            feats = obj.get("features") or []
            if len(feats) != 1:
                raise GridFormatError("mask FeatureCollection must hold one feature")
            obj = feats[0]
        if obj.get("type") == "Feature":
            obj = obj.get("geometry") or {}
        if obj.get("type") != "Polygon":
            raise GridFormatError("mask geometry must be a Polygon")
        rings = obj.get("coordinates") or []
        if len(rings) != 1:
            raise GridFormatError("mask polygon must have exactly one ring")
        # GeoJSON positions are (lon, lat)
        return RegionMask(polygon=[(lat, lon) for lon, lat, *_ in rings[0]])
    ids = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            ids.append(int(line))
        except ValueError:
            raise GridFormatError(f"bad cell id {line!r}", row=lineno) from None
    return RegionMask(cell_ids=ids)


def positions(grid: GridSeries) -> np.ndarray:
    """(n, 2) array of planar km coordinates."""
    return np.column_stack([grid.x_km, grid.y_km])


def as_series_array(data: GridSeries | Sequence) -> np.ndarray:
    if isinstance(data, GridSeries):
        return data.values
    return np.atleast_2d(np.asarray(data, dtype=float))
