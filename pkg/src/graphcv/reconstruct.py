"""Least-squares bandlimited reconstruction and the residual (error) operators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from graphcv.errors import InfeasibleError, NumericalError
from graphcv.graph import complement, submatrix, vertex_set

RCOND = 1e-10


@dataclass(frozen=True)
class ReconstructionResult:
    estimate: np.ndarray  # values on the unknown set, ascending vertex order
    unknown: np.ndarray
    coefficients: np.ndarray
    bandwidth: int
    condition_number: float
    rank: int

    @property
    def rank_deficient(self):
        return self.rank < self.bandwidth


def pinv_svd(B, rcond=RCOND):
    """Pseudo-inverse through the SVD, dropping singular values below ``rcond * s_max``.

    Returns ``(pinv, singular_values, rank)``.
    """
    if B.size == 0:
        return np.zeros(B.shape[::-1]), np.zeros(0), 0
    Ub, s, Vt = np.linalg.svd(B, full_matrices=False)
    keep = s > rcond * s[0] if s[0] > 0 else np.zeros(len(s), dtype=bool)
    rank = int(keep.sum())
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return (Vt.T * inv_s) @ Ub.T, s, rank


def condition_number(s):
    if len(s) == 0 or s[-1] <= 0:
        return np.inf
    return float(s[0] / s[-1])


def _check_bandwidth(r, n_known, n):
    if r < 1:
        raise InfeasibleError(f"bandwidth must be >= 1, got {r}")
    if r >= n_known:
        raise InfeasibleError(f"bandwidth r={r} must be below the number of known vertices {n_known}")
    if r > n:
        raise InfeasibleError(f"bandwidth r={r} exceeds graph size {n}")


def _training_pinv(basis, S, r, rcond):
    P, s, rank = pinv_svd(submatrix(basis.vectors, S, np.arange(r)), rcond)
    if rank == 0:
        raise NumericalError(f"U_SR is numerically zero for |S|={len(S)}, r={r}")
    return P, s, rank


def reconstruct_ls(basis, S, x_S, r, rcond=RCOND):
    """Fit the ``r`` lowest-frequency coefficients to ``x_S`` and extrapolate to the rest.

    The fit is the minimum-norm least-squares solution; the inverse of
    ``U_SR^T U_SR`` is never formed explicitly.
    """
    S = np.asarray(S, dtype=np.int64).reshape(-1)
    x_S = np.asarray(x_S, dtype=float).reshape(-1)
    if x_S.shape != S.shape:
        raise ValueError(f"x_S has {x_S.size} entries for {S.size} known vertices")
    order = np.argsort(S, kind="stable")
    S = vertex_set(S[order], basis.n)
    x_S = x_S[order]
    _check_bandwidth(r, len(S), basis.n)
    P, s, rank = _training_pinv(basis, S, r, rcond)
    coeffs = P @ x_S
    unknown = complement(S, basis.n)
    estimate = submatrix(basis.vectors, unknown, np.arange(r)) @ coeffs
    return ReconstructionResult(estimate, unknown, coeffs, r, condition_number(s), rank)


def error_operator(basis, S_train, S_hold, r, rcond=RCOND):
    """Map from out-of-band coefficients to the residual on ``S_hold``.

    For any signal with out-of-band part ``beta`` (coefficients ``r..n-1``),
    reconstructing from ``S_train`` leaves the residual ``M @ beta`` on
    ``S_hold``.
    """
    S_train = vertex_set(S_train, basis.n)
    S_hold = vertex_set(S_hold, basis.n)
    _check_bandwidth(r, len(S_train), basis.n)
    return _error_operator(basis, S_train, S_hold, r, rcond)[0]


def _error_operator(basis, S_train, S_hold, r, rcond):
    P, s, rank = _training_pinv(basis, S_train, r, rcond)
    U = basis.vectors
    U_hold = U[S_hold]
    lifted = U_hold[:, :r] @ P  # |hold| x |train|
    M = U_hold[:, r:] - lifted @ U[S_train, r:]
    return M, lifted, s, rank
