"""Graph signals: bandlimited synthesis, graph Fourier transform, known/unknown partitions."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from graphcv.errors import IngestError
from graphcv.graph import complement, vertex_set


@dataclass(frozen=True)
class GraphSignal:
    """Vertex values plus the set ``S`` where they are considered known.

    ``values`` may hold NaN on unknown vertices when no ground truth exists.
    """

    values: np.ndarray
    known: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        known = vertex_set(self.known, len(values))
        if len(known) < 1:
            raise ValueError("known set must be non-empty")
        if np.any(np.isnan(values[known])):
            raise ValueError("known vertices must carry values")
        values.setflags(write=False)
        known.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "known", known)

    @property
    def n(self):
        return len(self.values)

    @property
    def unknown(self):
        return complement(self.known, self.n)

    @property
    def known_values(self):
        return self.values[self.known]

    @property
    def has_ground_truth(self):
        return not np.any(np.isnan(self.values))

    def with_known(self, known):
        return GraphSignal(self.values, known)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex", "value", "known"])
        mask = np.zeros(self.n, dtype=bool)
        mask[self.known] = True
        for v, (x, k) in enumerate(zip(self.values.tolist(), mask.tolist())):
            w.writerow([v, "" if np.isnan(x) else repr(x), int(k)])
        return buf.getvalue()


def read_signal_csv(path):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        if reader.fieldnames is None or set(reader.fieldnames) != {"vertex", "value", "known"}:
            raise IngestError(f"expected columns vertex,value,known, got {reader.fieldnames}", path)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            try:
                v = int(row["vertex"])
                x = float(row["value"]) if row["value"].strip() else np.nan
                k = int(row["known"])
            except (TypeError, ValueError):
                raise IngestError(f"malformed row {row}", path, lineno) from None
            if k not in (0, 1):
                raise IngestError(f"known must be 0 or 1, got {k}", path, lineno)
            rows.append((v, x, k))
    n = len(rows)
    values = np.full(n, np.nan)
    known = []
    for v, x, k in rows:
        if not 0 <= v < n:
            raise IngestError(f"vertex {v} out of range [0, {n})", path)
        values[v] = x
        if k:
            known.append(v)
    return GraphSignal(values, known)


def write_signal_csv(signal, path):
    Path(path).write_text(signal.to_csv(), encoding="utf-8")


@dataclass(frozen=True)
class BandlimitedSpec:
    """Noisy bandlimited model: ``bandwidth`` lowest frequencies plus white vertex noise.

    Powers are mean squares per vertex, enforced exactly by rescaling.
    """

    bandwidth: int
    signal_power: float = 1.0
    noise_power: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.bandwidth < 1:
            raise ValueError(f"bandwidth must be >= 1, got {self.bandwidth}")
        if self.signal_power < 0 or self.noise_power < 0:
            raise ValueError("powers must be non-negative")


def _rescale(v, power):
    n = len(v)
    norm2 = float(v @ v)
    if power == 0 or norm2 == 0:
        return np.zeros(n)
    return v * np.sqrt(power * n / norm2)


def synth_bandlimited(basis, spec, known=None):
    """Draw ``x = U_R a + noise`` with both parts rescaled to their target powers.

    ``known`` defaults to every vertex; the full vector is always stored as
    ground truth.
    """
    n = basis.n
    if spec.bandwidth > n:
        raise ValueError(f"bandwidth {spec.bandwidth} exceeds graph size {n}")
    rng = np.random.default_rng(spec.seed)
    alpha = rng.standard_normal(spec.bandwidth)
    smooth = _rescale(basis.low(spec.bandwidth) @ alpha, spec.signal_power)
    noise = _rescale(rng.standard_normal(n), spec.noise_power)
    known = np.arange(n) if known is None else known
    return GraphSignal(smooth + noise, known)


def _check_dim(basis, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (basis.n,):
        raise ValueError(f"signal has shape {x.shape}, basis expects ({basis.n},)")
    return x


def gft(basis, x):
    return basis.vectors.T @ _check_dim(basis, x)


def igft(basis, coeffs):
    return basis.vectors @ _check_dim(basis, coeffs)


def spectral_split(basis, x, r):
    """Split ``x`` into in-band coefficients (first ``r``) and out-of-band ones."""
    if not 1 <= r < basis.n:
        raise ValueError(f"need 1 <= r < n, got r={r}, n={basis.n}")
    c = gft(basis, x)
    return c[:r], c[r:]
