"""Two-phase acceptance-rejection choice of the next reaction.

Election: reaction ``j`` draws ``u = v * T`` with ``v ~ U[0, 1)`` and is
eligible iff ``u < D_j`` (and ``D_j != 0``), in which case it is rated
``u / D_j``; ineligible reactions carry the sentinel rating ``1.0``.

Selection: the eligible reaction with the lowest rating wins, ties going to
the lowest index.  If nothing is eligible the outcome is ``REJECTED``.

Both phases take a fixed number of operations per realization (M draws and
one M-wide reduction), so K realizations run in lockstep.  In the batched
entry points draw ``j`` of step ``s`` of realization ``k`` is always counter
``s * M + j`` of stream ``(seed, k, "election")``; results therefore do not
depend on how the K x M grid is split between workers.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import ContractViolationError, DegenerateDistributionError
from .model import as_values
from .rng import draw, stream_keys

__all__ = [
    "SENTINEL",
    "REJECTED",
    "ThresholdPolicy",
    "compute_threshold",
    "row_thresholds",
    "election_step",
    "selection_step",
    "merge_argmin",
    "batched_select",
    "select_rows",
    "tally_identical_rows",
]

SENTINEL = 1.0
REJECTED = -1


@dataclass(frozen=True)
class ThresholdPolicy:
    """Threshold ``T = w * max_j D_j``; ``w`` must be at least 1."""

    w: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.w) and self.w >= 1.0):
            raise ValueError(f"threshold multiplier must be finite and >= 1, got {self.w}")


def _policy(policy):
    return policy if isinstance(policy, ThresholdPolicy) else ThresholdPolicy(float(policy))


def compute_threshold(row, policy=ThresholdPolicy()):
    D = as_values(row)
    m = float(D.max())
    if not m > 0:
        raise DegenerateDistributionError("no reaction has positive propensity")
    return _policy(policy).w * m


def row_thresholds(D, policy=ThresholdPolicy()):
    """Per-row thresholds of a (K, M) array; all-zero rows get ``T = 0``."""
    return _policy(policy).w * np.asarray(D, dtype=np.float64).max(axis=1)


def election_step(row, T, draws):
    """Ratings for one realization given its M unit draws."""
    D = as_values(row)
    v = np.asarray(draws, dtype=np.float64)
    if v.shape != D.shape:
        raise ContractViolationError(f"need exactly {D.size} draws, got {v.size}")
    if np.any(~(v >= 0.0)) or np.any(v >= 1.0):
        raise ContractViolationError("unit draws must lie in [0, 1)")
    if not T > 0:
        raise ContractViolationError("threshold must be positive")
    u = v * T
    eligible = (u < D) & (D != 0.0)
    ratings = np.full(D.shape, SENTINEL)
    ratings[eligible] = u[eligible] / D[eligible]
    return ratings


def selection_step(ratings):
    """Index of the lowest rating below 1, or ``REJECTED``."""
    r = np.asarray(ratings, dtype=np.float64)
    j = int(np.argmin(r))  # first occurrence == lowest index on ties
    return j if r[j] < 1.0 else REJECTED


def merge_argmin(r1, i1, r2, i2):
    """Combine two partial (rating, index) minima lexicographically.

    Associative and commutative, so any reduction tree over column blocks
    gives the same winner.  Rejected partials carry ``(1.0, REJECTED)``.
    """
    r1, i1, r2, i2 = map(np.asarray, (r1, i1, r2, i2))
    i1k = np.where(i1 < 0, np.iinfo(np.int64).max, i1)
    i2k = np.where(i2 < 0, np.iinfo(np.int64).max, i2)
    take2 = (r2 < r1) | ((r2 == r1) & (i2k < i1k))
    return np.where(take2, r2, r1), np.where(take2, i2, i1)


@nb.njit(cache=True, nogil=True)
def _elect_block(D, T, keys, base, j0, j1, best_r, best_i):
    # D: (K, M); T, keys, base: (K,); writes the block minimum per row.
    for k in range(D.shape[0]):
        key = keys[k]
        t = T[k]
        b = base[k]
        br = 1.0
        bi = -1
        for j in range(j0, j1):
            d = D[k, j]
            u = draw(key, b + np.uint64(j)) * t
            if u < d and d != 0.0:
                r = u / d
                if r < br:
                    br = r
                    bi = j
        best_r[k] = br
        best_i[k] = bi


@nb.njit(cache=True, nogil=True)
def _tally(D, T, keys, n_rounds, step0, counts):
    # Identical rows: realization k runs n_rounds[k] selections from step0.
    M = D.shape[0]
    rejected = 0
    for k in range(keys.shape[0]):
        key = keys[k]
        for s in range(n_rounds[k]):
            b = np.uint64(step0 + s) * np.uint64(M)
            br = 1.0
            bi = -1
            for j in range(M):
                d = D[j]
                u = draw(key, b + np.uint64(j)) * T
                if u < d and d != 0.0:
                    r = u / d
                    if r < br:
                        br = r
                        bi = j
            if bi < 0:
                rejected += 1
            else:
                counts[bi] += 1
    return rejected


def _chunks(n, parts):
    parts = max(1, min(int(parts), n))
    edges = np.linspace(0, n, parts + 1).round().astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _run(tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: t(), tasks))


def select_rows(D, thresholds, keys, steps, workers=1, column_blocks=1):
    """AR selection for each row of ``D`` with explicit stream keys.

    ``steps`` (scalar or per row) fixes the counters ``steps * M + j``.
    Rows are split into ``workers`` contiguous chunks and columns into
    ``column_blocks`` blocks whose partial minima are merged with
    :func:`merge_argmin`; neither split changes the result.
    """
    D = np.ascontiguousarray(D, dtype=np.float64)
    K, M = D.shape
    T = np.ascontiguousarray(np.broadcast_to(thresholds, (K,)), dtype=np.float64)
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    base = np.ascontiguousarray(np.broadcast_to(steps, (K,)), dtype=np.uint64) * np.uint64(M)
    col = _chunks(M, column_blocks)
    best_r = np.empty((len(col), K))
    best_i = np.empty((len(col), K), dtype=np.int64)

    def task(a, b, c):
        j0, j1 = col[c]
        return lambda: _elect_block(D[a:b], T[a:b], keys[a:b], base[a:b], j0, j1,
                                    best_r[c, a:b], best_i[c, a:b])

    _run([task(a, b, c) for a, b in _chunks(K, workers) for c in range(len(col))], workers)
    r, i = best_r[0], best_i[0]
    for c in range(1, len(col)):
        r, i = merge_argmin(r, i, best_r[c], best_i[c])
    return np.asarray(i, dtype=np.int64)


def batched_select(matrix, policy=ThresholdPolicy(), seed=0, step=0, workers=1,
                   column_blocks=1, realizations=None):
    """Select the next reaction for every row of a (K, M) propensity matrix.

    All-zero rows come back ``REJECTED``.  ``realizations`` gives the
    global realization index of each row (default ``0..K-1``).
    """
    D = as_values(matrix)
    if D.ndim != 2:
        raise ValueError("expected a (K, M) propensity matrix")
    ks = np.arange(D.shape[0]) if realizations is None else np.asarray(realizations)
    keys = stream_keys(seed, ks, "election")
    return select_rows(D, row_thresholds(D, policy), keys, step, workers, column_blocks)


def tally_identical_rows(row, policy, seed, K, total, workers=1, step0=0):
    """Run ``total`` AR selections over K realizations sharing ``row``.

    Realization ``k`` performs ``ceil(total / K)`` or one fewer selections
    (the last round is partial) at steps ``step0, step0 + 1, ...``.
    Returns ``(counts, rejections)`` with ``counts.sum() + rejections == total``.
    """
    D = np.ascontiguousarray(as_values(row), dtype=np.float64)
    T = float(_policy(policy).w * D.max())
    rounds, extra = divmod(int(total), int(K))
    n_rounds = np.full(K, rounds, dtype=np.int64)
    n_rounds[:extra] += 1
    keys = stream_keys(seed, np.arange(K), "election")
    parts = _chunks(K, workers)
    counts = np.zeros((len(parts), D.size), dtype=np.int64)

    def task(p, a, b):
        return lambda: _tally(D, T, keys[a:b], n_rounds[a:b], step0, counts[p])

    rejected = _run([task(p, a, b) for p, (a, b) in enumerate(parts)], workers)
    return counts.sum(axis=0), int(sum(rejected))
