"""Sensor station tables (CSV) to graphs and ground-truth signals.

Expected columns: ``id,lat,lon,elev_m,<value_column>``. Lines starting
with ``#`` are ignored. Elevation is given in meters and stored in km.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from graphcv.builders import GeoPoint, KnnGraphConfig, knn_graph
from graphcv.errors import IngestError, InfeasibleError
from graphcv.signals import GraphSignal

MISSING_TOKENS = frozenset({"", "NA", "-9999"})
REQUIRED = ("id", "lat", "lon", "elev_m")


@dataclass(frozen=True)
class Station:
    id: str
    latitude: float
    longitude: float
    elevation_m: float
    value: float | None

    @property
    def point(self):
        return GeoPoint(self.latitude, self.longitude, self.elevation_m / 1000.0)


@dataclass(frozen=True)
class StationTable:
    stations: tuple
    value_column: str
    source: str | None = None

    def __len__(self):
        return len(self.stations)

    def present(self):
        return [s for s in self.stations if s.value is not None]


def _parse_float(text, field, path, lineno):
    try:
        v = float(text)
    except ValueError:
        raise IngestError(f"field {field!r}: cannot parse {text!r} as a number", path, lineno) from None
    if not math.isfinite(v):
        raise IngestError(f"field {field!r}: non-finite value {text!r}", path, lineno)
    return v


def parse_station_csv(path, value_column, missing_tokens=MISSING_TOKENS):
    """Read a station table; values in ``missing_tokens`` become ``None``."""
    path = Path(path)
    missing = {t.strip() for t in missing_tokens}
    with path.open(newline="", encoding="utf-8") as fh:
        numbered = ((i, line) for i, line in enumerate(fh, start=1) if not line.lstrip().startswith("#"))
        header_line = None
        lines = []
        for lineno, line in numbered:
            if header_line is None:
                header_line = (lineno, line)
            else:
                lines.append((lineno, line))
    if header_line is None:
        raise IngestError("empty file", path)
    header = [h.strip() for h in next(csv.reader([header_line[1]]))]
    for col in (*REQUIRED, value_column):
        if col not in header:
            raise IngestError(f"unknown column {col!r}; available columns: {', '.join(header)}", path, header_line[0])
    pos = {name: header.index(name) for name in (*REQUIRED, value_column)}

    stations, seen = [], set()
    for lineno, line in lines:
        if not line.strip():
            continue
        row = next(csv.reader([line]))
        if len(row) != len(header):
            raise IngestError(f"expected {len(header)} fields, got {len(row)}", path, lineno)
        sid = row[pos["id"]].strip()
        if not sid:
            raise IngestError("empty station id", path, lineno)
        if sid in seen:
            raise IngestError(f"duplicate station id {sid!r}", path, lineno)
        seen.add(sid)
        lat = _parse_float(row[pos["lat"]].strip(), "lat", path, lineno)
        lon = _parse_float(row[pos["lon"]].strip(), "lon", path, lineno)
        elev = _parse_float(row[pos["elev_m"]].strip(), "elev_m", path, lineno)
        if not -90 <= lat <= 90:
            raise IngestError(f"field 'lat': {lat} outside [-90, 90] (station {sid})", path, lineno)
        if not -180 <= lon <= 180:
            raise IngestError(f"field 'lon': {lon} outside [-180, 180] (station {sid})", path, lineno)
        raw = row[pos[value_column]].strip()
        value = None if raw in missing else _parse_float(raw, value_column, path, lineno)
        stations.append(Station(sid, lat, lon, elev, value))
    return StationTable(tuple(stations), value_column, str(path))


@dataclass(frozen=True)
class Experiment:
    graph: object
    signal: GraphSignal
    station_ids: tuple  # vertex index -> station id

    def vertex_of(self, station_id):
        return self.station_ids.index(station_id)


def to_experiment(table, cfg=None):
    """Drop stations without a value, order the rest by id, and build the k-NN graph.

    Ordering by id makes the vertex numbering independent of row order in
    the source file.
    """
    cfg = cfg or KnnGraphConfig()
    kept = sorted(table.present(), key=lambda s: s.id)
    if len(kept) < cfg.k + 1:
        raise InfeasibleError(
            f"only {len(kept)} stations have a {table.value_column!r} value; need at least k+1={cfg.k + 1}"
        )
    g = knn_graph([s.point for s in kept], cfg)
    values = np.array([s.value for s in kept], dtype=float)
    signal = GraphSignal(values, np.arange(len(kept)))
    return Experiment(g, signal, tuple(s.id for s in kept))


def write_station_csv(path, rows, value_column="value"):
    """Write ``(id, lat, lon, elev_m, value)`` rows; ``None`` values become ``NA``."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*REQUIRED, value_column])
        for sid, lat, lon, elev, value in rows:
            w.writerow([sid, repr(float(lat)), repr(float(lon)), repr(float(elev)), "NA" if value is None else repr(float(value))])


def synthetic_stations(n_present=300, n_missing=12, seed=0):
    """California-like station table: smooth temperature field plus sensor noise.

    Returns rows for :func:`write_station_csv`; ``n_missing`` rows carry no value.
    """
    rng = np.random.default_rng(seed)
    total = n_present + n_missing
    lat = rng.uniform(32.5, 42.0, total)
    lon = rng.uniform(-124.2, -114.2, total)
    elev = np.clip(rng.gamma(1.5, 400.0, total), 0.0, 4000.0)
    temp = 20.0 - 0.6 * (lat - 32.5) + 0.25 * (lon + 124.2) - 6.5 * elev / 1000.0
    temp = temp + 0.5 * rng.standard_normal(total)
    missing = set(rng.choice(total, size=n_missing, replace=False).tolist())
    rows = []
    for i in range(total):
        value = None if i in missing else round(float(temp[i]), 3)
        rows.append((f"ST{i:04d}", round(float(lat[i]), 5), round(float(lon[i]), 5), round(float(elev[i]), 1), value))
    return rows
