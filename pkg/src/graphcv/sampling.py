"""Choosing the known vertex set and splitting it into repeated K-fold plans."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass

import numpy as np

from graphcv.errors import InfeasibleError
from graphcv.graph import vertex_set

STRATEGIES = ("random", "greedy-dopt")


def select_known_set(basis, m, strategy="random", seed=None, r_ref=None, eps=1e-8):
    """Pick ``m`` vertices to observe.

    ``random`` samples uniformly without replacement. ``greedy-dopt`` grows
    the set one vertex at a time, each time adding the vertex that most
    increases ``log det(U_SR^T U_SR + eps I)`` for the ``r_ref`` lowest
    frequencies (default ``m // 2``). Ties go to the lowest index.
    """
    n = basis.n
    if not 1 <= m <= n:
        raise InfeasibleError(f"need 1 <= m <= n, got m={m}, n={n}")
    if strategy == "random":
        rng = np.random.default_rng(seed)
        return np.sort(rng.choice(n, size=m, replace=False))
    if strategy != "greedy-dopt":
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if r_ref is None:
        r_ref = max(1, m // 2)
    if not 1 <= r_ref <= n:
        raise ValueError(f"r_ref must lie in [1, n], got {r_ref}")
    if m <= r_ref:
        warnings.warn(f"greedy-dopt with m={m} <= r_ref={r_ref}: selected set cannot support bandwidth r_ref", stacklevel=2)
    if m == n:
        return np.arange(n)
    return _greedy_dopt(basis.low(r_ref), m, eps)


def _greedy_dopt(U_R, m, eps):
    # det(A + u u^T) = det(A) (1 + u^T A^{-1} u): maximize the quadratic form,
    # keeping A^{-1} current with Sherman-Morrison updates
    n, r = U_R.shape
    A_inv = np.eye(r) / eps
    chosen = np.zeros(n, dtype=bool)
    picked = []
    for _ in range(m):
        gain = np.einsum("ij,jk,ik->i", U_R, A_inv, U_R)
        gain[chosen] = -np.inf
        v = int(np.argmax(gain))
        u = A_inv @ U_R[v]
        A_inv = A_inv - np.outer(u, u) / (1.0 + U_R[v] @ u)
        A_inv = (A_inv + A_inv.T) / 2
        chosen[v] = True
        picked.append(v)
    return np.sort(np.array(picked, dtype=np.int64))


def dopt_logdet(U_R, S, eps=1e-8):
    """Objective maximized by the greedy strategy."""
    B = U_R[np.asarray(S)]
    return float(np.linalg.slogdet(B.T @ B + eps * np.eye(U_R.shape[1]))[1])


@dataclass(frozen=True)
class FoldPlan:
    """Repeated K-fold split of the known set.

    ``holdouts[i]`` is the held-out part of fold ``i``; folds are ordered by
    repeat and then by position within the repeat.
    """

    known: np.ndarray
    holdouts: tuple
    k: int
    repeats: int
    seed: int | None = None

    @property
    def folds(self):
        """List of ``(train, holdout)`` pairs."""
        return [(self.train(i), h) for i, h in enumerate(self.holdouts)]

    def train(self, i):
        return np.setdiff1d(self.known, self.holdouts[i], assume_unique=True)

    def repeat_of(self, i):
        return i // self.k

    def __len__(self):
        return len(self.holdouts)

    @classmethod
    def from_holdouts(cls, known, holdouts_per_repeat, seed=None):
        """Build a plan from explicit holdout partitions, one list per repeat."""
        known = vertex_set(known)
        ks = {len(rep) for rep in holdouts_per_repeat}
        if len(ks) != 1:
            raise ValueError("every repeat must have the same number of folds")
        flat = []
        for rep in holdouts_per_repeat:
            hs = [vertex_set(h) for h in rep]
            merged = np.sort(np.concatenate(hs))
            if not np.array_equal(merged, known):
                raise ValueError("holdouts of a repeat must partition the known set")
            if any(len(h) == 0 or len(h) == len(known) for h in hs):
                raise ValueError("each fold needs non-empty holdout and training parts")
            flat.extend(hs)
        for h in flat:
            h.setflags(write=False)
        known.setflags(write=False)
        return cls(known, tuple(flat), ks.pop(), len(holdouts_per_repeat), seed)

    def validate(self):
        """Raise ``AssertionError`` if any partition invariant is broken."""
        assert len(self.holdouts) == self.k * self.repeats
        for rep in range(self.repeats):
            hs = self.holdouts[rep * self.k:(rep + 1) * self.k]
            assert np.array_equal(np.sort(np.concatenate(hs)), self.known)
            sizes = [len(h) for h in hs]
            assert max(sizes) - min(sizes) <= 1
            assert min(sizes) >= 1 and max(sizes) < len(self.known)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["repeat", "fold", "vertex", "role"])
        for i, h in enumerate(self.holdouts):
            rep, fold = divmod(i, self.k)
            hold = set(h.tolist())
            for v in self.known.tolist():
                w.writerow([rep, fold, v, "holdout" if v in hold else "train"])
        return buf.getvalue()


def make_folds(S, k=10, repeats=1, seed=None):
    """Shuffle ``S`` independently per repeat and cut it into ``k`` near-equal holdouts.

    The first ``len(S) % k`` holdouts of each repeat get the extra element.
    """
    S = vertex_set(S)
    if k < 2:
        raise InfeasibleError(f"need k >= 2 folds, got {k}")
    if k > len(S):
        raise InfeasibleError(f"cannot make {k} folds from {len(S)} known vertices")
    if repeats < 1:
        raise InfeasibleError(f"need repeats >= 1, got {repeats}")
    rng = np.random.default_rng(seed)
    reps = []
    for _ in range(repeats):
        perm = rng.permutation(S)
        reps.append(np.array_split(perm, k))
    return FoldPlan.from_holdouts(S, reps, seed=seed)
