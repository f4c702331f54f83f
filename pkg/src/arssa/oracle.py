"""Exact selection law of the acceptance-rejection method.

With ``a_i = D_i / T`` (all at most 1), reaction j is eligible with
probability ``a_j`` and, given eligibility, its rating is ``U[0, 1)``.
It wins iff every other reaction is ineligible or rated higher, so

    P(j)   = integral_0^1  a_j * prod_{i != j} (1 - r a_i)  dr
    reject = prod_i (1 - a_i)

The integrand is a polynomial of degree (#positive - 1) in r, which a
Gauss-Legendre rule with ceil(#positive / 2) nodes integrates exactly; the
product is evaluated in log space so M in the thousands does not underflow.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DegenerateDistributionError, UnsupportedRegimeError
from .model import as_values

__all__ = [
    "WinProbabilityVector",
    "win_probabilities",
    "brute_force_win_probabilities",
    "it_probabilities",
]


@dataclass(frozen=True, eq=False)
class WinProbabilityVector:
    per_reaction: np.ndarray
    reject: float

    @property
    def total(self):
        return float(self.per_reaction.sum() + self.reject)

    def conditional(self):
        """Win probabilities given that the round was not rejected."""
        s = self.per_reaction.sum()
        if not s > 0:
            raise DegenerateDistributionError("every round is rejected")
        return self.per_reaction / s


def _gl_integrals(a_pos, n):
    x, w = np.polynomial.legendre.leggauss(n)
    r = 0.5 * (x + 1.0)
    w = 0.5 * w
    logf = np.log1p(-np.outer(r, a_pos))  # (n, P)
    total = logf.sum(axis=1, keepdims=True)
    return a_pos * (w[:, None] * np.exp(total - logf)).sum(axis=0)


def win_probabilities(row, T, tol=1e-12):
    """Probability that each reaction wins one election round at threshold T.

    The rule size starts at the exact-degree count and is doubled until two
    successive rules agree to ``tol`` on every entry.
    """
    D = as_values(row)
    if not T > 0:
        raise ContractViolationError("threshold must be positive")
    if not tol > 0:
        raise ContractViolationError("tolerance must be positive")
    if np.any(D > T):
        raise UnsupportedRegimeError("a propensity exceeds the threshold; need w >= 1")
    a = D / T
    pos = a > 0
    per = np.zeros(D.size)
    if not pos.any():
        return WinProbabilityVector(per, 1.0)
    a_pos = a[pos]
    n = (a_pos.size + 1) // 2 + 1
    cur = _gl_integrals(a_pos, n)
    for _ in range(8):
        nxt = _gl_integrals(a_pos, 2 * n)
        converged = np.max(np.abs(nxt - cur)) <= tol
        n, cur = 2 * n, nxt
        if converged:
            break
    else:
        raise RuntimeError("quadrature did not reach the requested tolerance")
    per[pos] = cur
    with np.errstate(divide="ignore"):
        reject = float(np.exp(np.log1p(-a_pos).sum()))
    return WinProbabilityVector(per, reject)


def brute_force_win_probabilities(row, T, samples, seed=0, chunk=1 << 16):
    """Monte Carlo estimate of :func:`win_probabilities`.

    Uses numpy's PCG64 generator, which is unrelated to the counter-based
    streams used for production selections.
    """
    D = as_values(row)
    samples = int(samples)
    if samples < 1:
        raise ContractViolationError("need at least one sample")
    if not T > 0:
        raise ContractViolationError("threshold must be positive")
    gen = np.random.Generator(np.random.PCG64(seed))
    counts = np.zeros(D.size, dtype=np.int64)
    rejected = 0
    rows = max(1, chunk // max(1, D.size))
    done = 0
    while done < samples:
        n = min(rows, samples - done)
        u = gen.random((n, D.size)) * T
        ok = (u < D) & (D != 0)
        ratings = np.where(ok, u / np.where(D == 0, 1.0, D), 1.0)
        j = ratings.argmin(axis=1)
        won = ratings[np.arange(n), j] < 1.0
        counts += np.bincount(j[won], minlength=D.size)
        rejected += int(n - won.sum())
        done += n
    return WinProbabilityVector(counts / samples, rejected / samples)


def it_probabilities(row):
    """Selection law of the inverse-transform method: ``alpha_j / alpha_0``."""
    D = as_values(row)
    total = D.sum()
    if not total > 0:
        raise DegenerateDistributionError("propensity distribution has zero total")
    return WinProbabilityVector(D / total, 0.0)
