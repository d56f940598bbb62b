"""Cross-validation estimates of the reconstruction error as a function of bandwidth.

Two estimators are provided. The naive one averages squared holdout
residuals over folds. The weighted one first multiplies each fold residual
by ``diag(c) V^T``, where ``M_i = V diag(s) W^T`` is the fold's error
operator and ``c_j = 1 / max(s_j, 1)``. This caps every gain of the fold's
error operator at one, so a fold whose training part says little about its
holdout part (an ill-conditioned ``M_i``) cannot inflate the estimate.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from graphcv.errors import InfeasibleError, NumericalError
from graphcv.graph import complement
from graphcv.reconstruct import RCOND, _error_operator, condition_number, reconstruct_ls

CLIP = 1.0
MODES = ("naive", "weighted")


@dataclass(frozen=True)
class FoldError:
    fold: int
    raw_error: np.ndarray
    weighted_error: np.ndarray | None = None
    singular_values: np.ndarray | None = None
    clipped_count: int = 0
    kappa: float = np.nan  # condition number of the training block U_{S_i R}

    @property
    def sigma_max(self):
        if self.singular_values is None or len(self.singular_values) == 0:
            return 0.0
        return float(self.singular_values[0])

    @property
    def raw_sq(self):
        return float(self.raw_error @ self.raw_error)

    @property
    def weighted_sq(self):
        return float(self.weighted_error @ self.weighted_error)


class FoldSkipped(InfeasibleError):
    """Fold cannot be evaluated at this bandwidth (training part too small)."""


def _fold_sets(fold):
    train, hold = fold
    return np.asarray(train, dtype=np.int64), np.asarray(hold, dtype=np.int64)


def _values_on(known, x_S, idx):
    pos = np.searchsorted(known, idx)
    return x_S[pos]


def _residual(basis, train, hold, x_train, x_hold, r, rcond):
    if r >= len(train):
        raise FoldSkipped(f"r={r} >= |S_i|={len(train)}")
    M, lifted, s, rank = _error_operator(basis, train, hold, r, rcond)
    return x_hold - lifted @ x_train, M, s


def fold_error_naive(basis, fold, known, x_S, r, rcond=RCOND):
    """Holdout residual ``x_hold - x_hat_hold`` after fitting on the training part.

    ``fold`` is a ``(train, holdout)`` pair of sorted vertex arrays, both
    subsets of the sorted ``known`` set on which ``x_S`` is given.
    """
    known = np.asarray(known, dtype=np.int64)
    x_S = np.asarray(x_S, dtype=float)
    train, hold = _fold_sets(fold)
    e, _, _ = _residual(basis, train, hold, _values_on(known, x_S, train), _values_on(known, x_S, hold), r, rcond)
    return e


def clip_weights(s, size, clip=CLIP):
    """Diagonal of the reweighting matrix: ``1/s`` where ``s >= clip``, else 1.

    Positions past ``len(s)`` (holdout larger than the operator's rank
    capacity) pass through with weight 1.
    """
    c = np.ones(size)
    m = min(len(s), size)
    big = s[:m] >= clip
    c[:m][big] = 1.0 / s[:m][big]
    return c


def _left_singular(M):
    rows, cols = M.shape
    if rows == 0:
        return np.zeros((0, 0)), np.zeros(0)
    V, s, _ = np.linalg.svd(M, full_matrices=rows > cols)
    return V, s


def weighted_fold(basis, fold_id, train, hold, x_train, x_hold, r, rcond=RCOND, clip=CLIP):
    e, M, s_train = _residual(basis, train, hold, x_train, x_hold, r, rcond)
    V, s = _left_singular(M)
    c = clip_weights(s, len(hold), clip)
    e_new = c * (V.T @ e)
    return FoldError(
        fold=fold_id,
        raw_error=e,
        weighted_error=e_new,
        singular_values=s,
        clipped_count=int(np.sum(s >= clip)),
        kappa=condition_number(s_train),
    )


def fold_error_weighted(basis, fold, known, x_S, r, fold_id=0, rcond=RCOND, clip=CLIP):
    """Reweighted holdout residual plus the fold's conditioning diagnostics."""
    known = np.asarray(known, dtype=np.int64)
    x_S = np.asarray(x_S, dtype=float)
    train, hold = _fold_sets(fold)
    return weighted_fold(
        basis, fold_id, train, hold,
        _values_on(known, x_S, train), _values_on(known, x_S, hold), r, rcond, clip,
    )


def evaluate_folds(basis, plan, x_S, r, rcond=RCOND, clip=CLIP):
    """All fold errors of ``plan`` at bandwidth ``r``, in plan order.

    Returns ``(fold_errors, skipped)`` with ``skipped`` a list of
    ``(fold_id, reason)``.
    """
    known = plan.known
    x_S = np.asarray(x_S, dtype=float)
    if x_S.shape != known.shape:
        raise ValueError(f"x_S has {x_S.size} entries for {known.size} known vertices")
    out, skipped = [], []
    for i, (train, hold) in enumerate(plan.folds):
        try:
            fe = weighted_fold(
                basis, i, train, hold,
                _values_on(known, x_S, train), _values_on(known, x_S, hold), r, rcond, clip,
            )
        except (FoldSkipped, NumericalError) as exc:
            skipped.append((i, str(exc)))
            continue
        out.append(fe)
    return out, skipped


def _average(errors, mode):
    if not errors:
        raise NumericalError("no usable folds to average")
    if mode == "naive":
        return float(np.mean([fe.raw_sq for fe in errors]))
    if mode == "weighted":
        return float(np.mean([fe.weighted_sq for fe in errors]))
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def estimate_error(basis, plan, x_S, r, mode="weighted", rcond=RCOND, clip=CLIP):
    """Mean squared fold error over every usable fold of every repeat."""
    errors, _ = evaluate_folds(basis, plan, x_S, r, rcond, clip)
    return _average(errors, mode)


@dataclass(frozen=True)
class BandwidthRecord:
    r: int
    actual: float  # NaN without ground truth
    naive: float
    weighted: float
    mean_kappa: float
    max_kappa: float
    clipped_frac: float
    skipped_folds: int
    usable_folds: int
    mean_holdout: float
    n_unknown: int
    degenerate_cut: bool = False

    @property
    def actual_normalized(self):
        return self.actual / self.n_unknown if self.n_unknown else 0.0

    @property
    def naive_normalized(self):
        return self.naive / self.mean_holdout

    @property
    def weighted_normalized(self):
        return self.weighted / self.mean_holdout


CSV_COLUMNS = (
    "r", "actual", "naive", "weighted", "mean_kappa", "max_kappa", "clipped_frac", "skipped_folds",
    "actual_normalized", "naive_normalized", "weighted_normalized",
)


@dataclass(frozen=True)
class SweepResult:
    records: tuple
    skipped_bandwidths: tuple = ()  # (r, reason)
    metadata: dict = field(default_factory=dict)

    @property
    def bandwidths(self):
        return [rec.r for rec in self.records]

    def column(self, name):
        return np.array([getattr(rec, name) for rec in self.records], dtype=float)

    def argmin(self, name="weighted"):
        """Bandwidth minimizing the given curve (first one on ties)."""
        vals = self.column(name)
        if np.all(np.isnan(vals)):
            return None
        return self.records[int(np.nanargmin(vals))].r

    def to_csv(self):
        buf = io.StringIO()
        for key, value in self.metadata.items():
            buf.write(f"# {key}: {value}\n")
        for r, reason in self.skipped_bandwidths:
            buf.write(f"# skipped r={r}: {reason}\n")
        degenerate = [rec.r for rec in self.records if rec.degenerate_cut]
        if degenerate:
            buf.write(f"# degenerate eigenvalue cut at r={','.join(map(str, degenerate))}\n")
        if any(not np.isnan(rec.actual) for rec in self.records):
            buf.write(f"# argmin actual: {self.argmin('actual')}\n")
        buf.write(f"# argmin weighted: {self.argmin('weighted')}\n")
        buf.write(f"# argmin naive: {self.argmin('naive')}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rec in self.records:
            w.writerow([_fmt(getattr(rec, col)) for col in CSV_COLUMNS])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if np.isnan(v):
        return "nan"
    return repr(float(v))


def sweep(basis, S, x_S, bandwidths, plan, ground_truth=None, rcond=RCOND, clip=CLIP, metadata=None):
    """Actual and estimated reconstruction errors for each candidate bandwidth.

    Bandwidths that no fold can support (``r`` at or above every training
    size, or at or above ``|S|``) are skipped and reported.
    """
    S = np.asarray(S, dtype=np.int64)
    if not np.array_equal(S, plan.known):
        raise ValueError("fold plan was not built on this known set")
    x_S = np.asarray(x_S, dtype=float)
    rs = [int(r) for r in bandwidths]
    if any(b <= a for a, b in zip(rs, rs[1:])):
        raise ValueError("bandwidths must be strictly increasing")
    if ground_truth is not None:
        ground_truth = np.asarray(ground_truth, dtype=float)
        if ground_truth.shape != (basis.n,):
            raise ValueError("ground truth must cover every vertex")
        if not np.allclose(ground_truth[S], x_S, rtol=0, atol=0):
            raise ValueError("ground truth disagrees with x_S on the known set")
    unknown = complement(S, basis.n)
    records, skipped = [], []
    for r in rs:
        if r < 1 or r >= len(S):
            skipped.append((r, f"r must satisfy 1 <= r < |S|={len(S)}"))
            continue
        errors, skipped_folds = evaluate_folds(basis, plan, x_S, r, rcond, clip)
        if not errors:
            skipped.append((r, f"no usable folds ({skipped_folds[0][1]})"))
            continue
        actual = np.nan
        if ground_truth is not None:
            rec = reconstruct_ls(basis, S, x_S, r, rcond)
            resid = ground_truth[unknown] - rec.estimate
            actual = float(resid @ resid)
        kappas = np.array([fe.kappa for fe in errors])
        n_sv = sum(len(fe.singular_values) for fe in errors)
        records.append(BandwidthRecord(
            r=r,
            actual=actual,
            naive=_average(errors, "naive"),
            weighted=_average(errors, "weighted"),
            mean_kappa=float(np.mean(kappas)),
            max_kappa=float(np.max(kappas)),
            clipped_frac=sum(fe.clipped_count for fe in errors) / n_sv if n_sv else 0.0,
            skipped_folds=len(skipped_folds),
            usable_folds=len(errors),
            mean_holdout=float(np.mean([len(fe.raw_error) for fe in errors])),
            n_unknown=len(unknown),
            degenerate_cut=basis.degenerate_cut(r),
        ))
    if not records:
        raise InfeasibleError("no bandwidth in the sweep could be evaluated")
    return SweepResult(tuple(records), tuple(skipped), dict(metadata or {}))
