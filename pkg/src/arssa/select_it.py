"""Inverse-transform (direct method) selection of the next reaction."""

import numpy as np

from .errors import DegenerateDistributionError
from .model import as_values

__all__ = ["inverse_transform_select", "inverse_transform_select_batch"]


def inverse_transform_select(row, u2):
    """Smallest j with ``alpha_0 + ... + alpha_j > u2 * alpha_total``.

    A plain linear scan.  The total is the final partial sum of the same
    scan, so the walk always terminates on a positive bin for ``u2 < 1``.
    """
    a = as_values(row)
    cum = np.cumsum(a)
    total = float(cum[-1])
    if not total > 0:
        raise DegenerateDistributionError("propensity distribution has zero total")
    target = u2 * total
    acc = 0.0
    for j, aj in enumerate(a):
        acc += aj
        if acc > target:
            return j
    return int(np.flatnonzero(a)[-1])


def inverse_transform_select_batch(D, u2):
    """Row-wise :func:`inverse_transform_select` for a (K, M) array.

    Rows with zero total yield ``-1``.
    """
    D = np.asarray(D, dtype=np.float64)
    u2 = np.broadcast_to(np.asarray(u2, dtype=np.float64), (D.shape[0],))
    cum = np.cumsum(D, axis=1)
    total = cum[:, -1]
    above = cum > (u2 * total)[:, None]
    j = np.argmax(above, axis=1)
    # rounding can leave u2*total == total; fall back to the last positive bin
    miss = ~above.any(axis=1) & (total > 0)
    if miss.any():
        last = D.shape[1] - 1 - np.argmax((D[miss] > 0)[:, ::-1], axis=1)
        j[miss] = last
    j[total <= 0] = -1
    return j.astype(np.int64)
