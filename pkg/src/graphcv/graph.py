"""Weighted undirected graphs, the combinatorial Laplacian and its eigenbasis."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from graphcv.errors import DecompositionError, IngestError

ZERO_EIG_TOL = 1e-8
TIE_GAP = 1e-9
SIGN_TOL = 1e-9


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with strictly positive edge weights.

    Edges are stored canonically: ``i < j``, sorted lexicographically, so two
    graphs with the same weighted edge set compare and hash identically
    regardless of the order the edges were supplied in.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_edges(cls, n, edges):
        """Build from an iterable of ``(i, j, w)`` triples.

        Either orientation of an edge may be given, but not both with
        different weights.
        """
        n = int(n)
        if n < 1:
            raise ValueError(f"graph needs at least one vertex, got n={n}")
        seen = {}
        for i, j, w in edges:
            i, j, w = int(i), int(j), float(w)
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            if not (w > 0 and np.isfinite(w)):
                raise ValueError(f"edge ({i}, {j}) has non-positive weight {w}")
            key = (min(i, j), max(i, j))
            if key in seen and seen[key] != w:
                raise ValueError(f"edge {key} given twice with different weights")
            seen[key] = w
        keys = sorted(seen)
        rows = [k[0] for k in keys]
        cols = [k[1] for k in keys]
        weights = [seen[k] for k in keys]
        return cls(n, _frozen(rows, np.int64), _frozen(cols, np.int64), _frozen(weights, float))

    @classmethod
    def from_adjacency(cls, A):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {A.shape}")
        if not np.array_equal(A, A.T):
            raise ValueError("adjacency is not symmetric")
        if np.any(np.diag(A) != 0):
            raise ValueError("adjacency has self-loops")
        if np.any(A < 0):
            raise ValueError("adjacency has negative weights")
        i, j = np.nonzero(np.triu(A, 1))
        return cls.from_edges(A.shape[0], zip(i, j, A[i, j]))

    @property
    def num_edges(self):
        return len(self.weights)

    def edges(self):
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.weights.tolist()))

    def adjacency(self):
        A = np.zeros((self.n, self.n))
        A[self.rows, self.cols] = self.weights
        A[self.cols, self.rows] = self.weights
        return A

    def degrees(self):
        d = np.zeros(self.n)
        np.add.at(d, self.rows, self.weights)
        np.add.at(d, self.cols, self.weights)
        return d

    def neighbors(self, v):
        mask_r = self.rows == v
        mask_c = self.cols == v
        return sorted(self.cols[mask_r].tolist() + self.rows[mask_c].tolist())

    def weight(self, i, j):
        a, b = min(i, j), max(i, j)
        hit = np.nonzero((self.rows == a) & (self.cols == b))[0]
        return float(self.weights[hit[0]]) if len(hit) else 0.0

    def num_components(self):
        """Connected components by union-find."""
        parent = list(range(self.n))

        def find(u):
            while parent[u] != u:
                parent[u] = parent[parent[u]]
                u = parent[u]
            return u

        for i, j in zip(self.rows.tolist(), self.cols.tolist()):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
        return len({find(u) for u in range(self.n)})

    def to_text(self):
        lines = [f"n={self.n}"]
        lines += [f"{i} {j} {w!r}" for i, j, w in self.edges()]
        return "\n".join(lines) + "\n"

    def content_hash(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self):
        return hash(self.content_hash())


def parse_edge_list(text, path=None):
    """Parse the ``n=<count>`` + ``i j w`` edge-list format."""
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            if not line.startswith("n="):
                raise IngestError("expected header 'n=<count>'", path, lineno)
            try:
                n = int(line[2:])
            except ValueError:
                raise IngestError(f"bad vertex count {line[2:]!r}", path, lineno) from None
            continue
        parts = line.split()
        if len(parts) != 3:
            raise IngestError(f"expected 'i j w', got {line!r}", path, lineno)
        try:
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError:
            raise IngestError(f"unparseable edge {line!r}", path, lineno) from None
    if n is None:
        raise IngestError("missing header 'n=<count>'", path)
    try:
        return Graph.from_edges(n, edges)
    except ValueError as exc:
        raise IngestError(str(exc), path) from None


def read_edge_list(path):
    path = Path(path)
    return parse_edge_list(path.read_text(encoding="utf-8"), path)


def write_edge_list(g, path):
    Path(path).write_text(g.to_text(), encoding="utf-8")


def laplacian(g):
    """Combinatorial Laplacian ``D - A``."""
    A = g.adjacency()
    return np.diag(A.sum(axis=1)) - A


@dataclass(frozen=True)
class SpectralBasis:
    """Laplacian eigenpairs, ascending; column ``i`` of ``vectors`` pairs with ``values[i]``."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def n(self):
        return len(self.values)

    def low(self, r):
        """The ``r`` lowest-frequency eigenvectors (columns 0..r-1)."""
        return self.vectors[:, :r]

    def degenerate_cut(self, r, gap=TIE_GAP):
        """True when bandwidth ``r`` splits a cluster of (numerically) repeated eigenvalues."""
        if r <= 0 or r >= self.n:
            return False
        return bool(self.values[r] - self.values[r - 1] < gap)

    def num_zero(self, tol=ZERO_EIG_TOL):
        return int(np.sum(self.values < tol))


def _fix_signs(U):
    for c in range(U.shape[1]):
        big = np.nonzero(np.abs(U[:, c]) > SIGN_TOL)[0]
        if len(big) and U[big[0], c] < 0:
            U[:, c] = -U[:, c]


def _order_ties(w, U):
    # within a multiplicity cluster, order columns lexicographically by rounded entries;
    # eigenvalues keep their sorted order since cluster members differ by < TIE_GAP
    order = np.arange(len(w))
    start = 0
    for end in range(1, len(w) + 1):
        if end == len(w) or w[end] - w[end - 1] >= TIE_GAP:
            if end - start > 1:
                block = list(range(start, end))
                block.sort(key=lambda c: tuple(np.round(U[:, c], 9).tolist()), reverse=True)
                order[start:end] = block
            start = end
    return w, U[:, order]


def spectral_decompose(g):
    """Dense eigendecomposition of the Laplacian with a deterministic basis."""
    L = laplacian(g)
    try:
        w, U = np.linalg.eigh(L)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"eigendecomposition failed for graph with n={g.n}: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(U))):
        raise DecompositionError(f"eigendecomposition produced non-finite values for n={g.n}")
    U = np.array(U, order="C")
    _fix_signs(U)
    w, U = _order_ties(w, U)
    w = _frozen(w, float)
    U = _frozen(U, float)
    return SpectralBasis(w, U)


def submatrix(U, rows, cols):
    """``U[rows][:, cols]``, i.e. the block indexed by two vertex/frequency sets."""
    U = np.asarray(U)
    rows = np.asarray(rows, dtype=np.int64).reshape(-1)
    cols = np.asarray(cols, dtype=np.int64).reshape(-1)
    for name, idx, bound in (("row", rows, U.shape[0]), ("column", cols, U.shape[1])):
        if idx.size and (idx.min() < 0 or idx.max() >= bound):
            raise IndexError(f"{name} index out of range [0, {bound})")
    return U[np.ix_(rows, cols)]


def vertex_set(indices, n=None):
    """Normalize to a sorted, duplicate-free index array, validated against ``n``."""
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    out = np.unique(idx)
    if len(out) != len(idx):
        raise ValueError("vertex set contains duplicates")
    if n is not None and out.size and (out[0] < 0 or out[-1] >= n):
        raise ValueError(f"vertex index out of range [0, {n})")
    return out


def complement(indices, n):
    mask = np.ones(n, dtype=bool)
    mask[np.asarray(indices, dtype=np.int64)] = False
    return np.nonzero(mask)[0]
