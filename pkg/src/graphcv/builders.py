"""Experiment graphs: random regular graphs and geographic k-NN sensor graphs."""

from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from graphcv.errors import InfeasibleError, NumericalError
from graphcv.graph import Graph

EARTH_RADIUS_KM = 6371.0088


def random_regular(n, d, seed=None, max_restarts=1000):
    """Random ``d``-regular simple graph on ``n`` vertices with unit weights.

    Stubs are paired at random. Pairs forming a self-loop or a repeated edge
    are returned to the stub pool and re-paired; when the remaining stubs
    cannot form any new edge the whole pairing restarts from scratch.
    """
    if (n * d) % 2 != 0:
        raise InfeasibleError(f"n*d must be even, got n={n}, d={d}")
    if not 0 <= d < n:
        raise InfeasibleError(f"need 0 <= d < n, got n={n}, d={d}")
    rng = np.random.default_rng(seed)

    def suitable(edges, pending):
        if not pending:
            return True
        nodes = sorted(pending)
        for a in range(len(nodes)):
            for b in range(a):
                if (nodes[b], nodes[a]) not in edges:
                    return True
        return False

    def attempt():
        edges = set()
        stubs = np.repeat(np.arange(n), d)
        while len(stubs):
            pending = defaultdict(int)
            stubs = rng.permutation(stubs)
            for s1, s2 in zip(stubs[0::2].tolist(), stubs[1::2].tolist()):
                if s1 > s2:
                    s1, s2 = s2, s1
                if s1 != s2 and (s1, s2) not in edges:
                    edges.add((s1, s2))
                else:
                    pending[s1] += 1
                    pending[s2] += 1
            if not suitable(edges, pending):
                return None
            stubs = np.array([v for v in sorted(pending) for _ in range(pending[v])], dtype=np.int64)
        return edges

    for _ in range(max_restarts):
        edges = attempt()
        if edges is not None:
            return Graph.from_edges(n, ((i, j, 1.0) for i, j in edges))
    raise NumericalError(f"random_regular(n={n}, d={d}) did not converge after {max_restarts} attempts")


@dataclass(frozen=True)
class GeoPoint:
    latitude: float
    longitude: float
    altitude: float = 0.0  # km

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")


@dataclass(frozen=True)
class KnnGraphConfig:
    k: int = 5
    sigma: float = 50.0  # km
    union: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def _haversine_km(lat1, lon1, lat2, lon2):
    # abs() on the differences keeps the result exactly symmetric in its arguments
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dphi = np.abs(np.radians(lat2) - np.radians(lat1))
    dlam = np.abs(np.radians(lon2) - np.radians(lon1))
    h = np.sin(dphi / 2) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def geo_distance(a, b):
    """Great-circle distance combined with the altitude difference, in km."""
    flat = float(_haversine_km(a.latitude, a.longitude, b.latitude, b.longitude))
    return math.hypot(flat, abs(a.altitude - b.altitude))


def distance_matrix(points):
    lat = np.array([p.latitude for p in points], dtype=float)
    lon = np.array([p.longitude for p in points], dtype=float)
    alt = np.array([p.altitude for p in points], dtype=float)
    flat = _haversine_km(lat[:, None], lon[:, None], lat[None, :], lon[None, :])
    D = np.hypot(flat, np.abs(alt[:, None] - alt[None, :]))
    np.fill_diagonal(D, 0.0)
    return D


def gaussian_weight(d, sigma):
    return np.exp(-np.square(d) / (2.0 * sigma**2))


def nearest_neighbors(D, k):
    """Indices of each row's ``k`` nearest other points; equal distances prefer the lower index."""
    n = D.shape[0]
    out = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        order = np.argsort(D[i], kind="stable")
        order = order[order != i]
        out[i] = order[:k]
    return out


def knn_graph(points, cfg=None):
    """Symmetrized k-nearest-neighbor graph with Gaussian-kernel weights.

    With ``cfg.union`` (the default) an edge is kept when either endpoint
    has the other among its ``k`` nearest; otherwise both must agree.
    """
    cfg = cfg or KnnGraphConfig()
    points = list(points)
    n = len(points)
    if n < cfg.k + 1:
        raise InfeasibleError(f"need at least k+1={cfg.k + 1} points, got {n}")
    D = distance_matrix(points)
    if np.any(D[np.triu_indices(n, 1)] == 0.0):
        warnings.warn("duplicate coordinates present; their edges get weight 1", stacklevel=2)
    nbrs = nearest_neighbors(D, cfg.k)
    directed = np.zeros((n, n), dtype=bool)
    directed[np.repeat(np.arange(n), cfg.k), nbrs.ravel()] = True
    keep = directed | directed.T if cfg.union else directed & directed.T
    i, j = np.nonzero(np.triu(keep, 1))
    w = gaussian_weight(D[i, j], cfg.sigma)
    # exp underflow for extremely distant neighbors would yield a zero weight
    w = np.maximum(w, np.finfo(float).tiny)
    return Graph.from_edges(n, zip(i, j, w))
