"""Accuracy experiments, rejection audit and throughput benchmark.

The accuracy protocol replicates one propensity row over K realizations,
draws a fixed total number of AR selections and compares the observed
frequencies with two targets: the normalized propensities (the classical
MSE figure of merit) and the exact selection law from :mod:`arssa.oracle`.
"""

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .errors import DegenerateDistributionError, InvalidSizeError
from .model import as_values
from .oracle import WinProbabilityVector, win_probabilities
from .select_ar import ThresholdPolicy, compute_threshold, tally_identical_rows

__all__ = [
    "TABLE_K",
    "TABLE_M",
    "TABLE_W",
    "ValidationReport",
    "mse_normalized",
    "max_z_score",
    "pooled_chisquare",
    "mse_sampling_noise",
    "run_selection_experiment",
    "run_grid",
    "write_grid_csv",
    "write_reports_json",
    "bench_select",
]

TABLE_K = (100, 1000, 10000, 50000, 62500)
TABLE_M = (64, 256, 1024)
TABLE_W = (1.0, 2.0)

GRID_COLUMNS = [
    "distribution", "K", "M", "w", "seed", "repeat", "total_selections",
    "mse_vs_propensity", "mse_vs_oracle", "rejections", "max_z",
]


def mse_normalized(target, observed):
    """Mean squared difference of the two vectors after normalizing each to sum 1."""
    t = as_values(target)
    o = np.asarray(observed, dtype=np.float64)
    if t.shape != o.shape:
        raise InvalidSizeError("target and observed lengths differ")
    ts, os_ = t.sum(), o.sum()
    if not (ts > 0 and os_ > 0):
        raise DegenerateDistributionError("cannot normalize a zero vector")
    return float(np.mean((t / ts - o / os_) ** 2))


def max_z_score(counts, probs, n, min_expected=5.0):
    """Largest ``|O_j/n - P_j| / sqrt(P_j (1 - P_j) / n)`` over well-populated bins.

    Only bins with ``n * P_j >= min_expected`` enter, where the normal
    approximation holds; a count in a bin with ``P_j == 0`` gives ``inf``.
    Returns ``(max_z, bins_used)``.
    """
    counts = np.asarray(counts, dtype=np.float64)
    p = np.asarray(probs, dtype=np.float64)
    if np.any((p == 0) & (counts > 0)):
        return math.inf, int(np.count_nonzero(p))
    use = (n * p >= min_expected) & (p < 1)
    if not use.any():
        return 0.0, 0
    z = np.abs(counts[use] / n - p[use]) / np.sqrt(p[use] * (1 - p[use]) / n)
    return float(z.max()), int(use.sum())


def pooled_chisquare(counts, probs, min_expected=5.0):
    """Pearson goodness of fit with sparse bins pooled.

    Bins whose expected count is below ``min_expected`` are merged into one
    bin; if that pool is itself too small it is merged into the smallest
    remaining bin.  Returns ``(statistic, p_value, dof)``.
    """
    obs = np.asarray(counts, dtype=np.float64)
    p = np.asarray(probs, dtype=np.float64)
    n = obs.sum()
    exp = p / p.sum() * n
    sparse = exp < min_expected
    o = list(obs[~sparse])
    e = list(exp[~sparse])
    if sparse.any():
        po, pe = obs[sparse].sum(), exp[sparse].sum()
        if pe >= min_expected or not e:
            o.append(po)
            e.append(pe)
        else:
            i = int(np.argmin(e))
            o[i] += po
            e[i] += pe
    if len(e) < 2:
        return 0.0, 1.0, 0
    res = stats.chisquare(np.array(o), np.array(e))
    return float(res.statistic), float(res.pvalue), len(e) - 1


def mse_sampling_noise(target, probs, n, draws=200, seed=0):
    """Sampling spread of ``mse_normalized(target, counts)`` under ``probs``.

    ``probs`` is the full selection law, reject mass last.  Counts are drawn
    ``draws`` times from the multinomial law with n trials; returns
    ``(bias_floor, mean, rms_deviation_from_floor)``.
    """
    p = np.asarray(probs, dtype=np.float64)
    M = as_values(target).size
    floor = mse_normalized(target, p[:M])
    gen = np.random.Generator(np.random.PCG64(seed))
    sims = np.array([
        mse_normalized(target, c[:M]) for c in gen.multinomial(int(n), p / p.sum(), size=draws)
    ])
    return floor, float(sims.mean()), float(np.sqrt(np.mean((sims - floor) ** 2)))


@dataclass
class ValidationReport:
    distribution: str
    M: int
    K: int
    w: float
    seed: int
    total_selections: int
    counts: np.ndarray
    rejections: int
    mse_vs_propensity: float
    mse_vs_oracle: float
    max_z_vs_oracle: float
    z_bins: int
    chi2: float
    chi2_p: float
    chi2_dof: int
    bias_floor: float
    oracle_reject: float
    repeat: int = 0
    elapsed_s: float = field(default=0.0, compare=False)

    def as_dict(self):
        d = asdict(self)
        d["counts"] = [int(c) for c in self.counts]
        return d

    def grid_row(self):
        return [
            self.distribution, self.K, self.M, repr(self.w), self.seed, self.repeat,
            self.total_selections, repr(self.mse_vs_propensity), repr(self.mse_vs_oracle),
            self.rejections, repr(self.max_z_vs_oracle),
        ]


def run_selection_experiment(row, K, total_selections, w=1.0, seed=0, workers=1,
                             distribution="custom", repeat=0, oracle=None):
    """Tally ``total_selections`` AR selections of ``row`` over K realizations.

    Selections run in ``ceil(total / K)`` rounds; the last round only uses
    as many realizations as needed so that exactly ``total_selections``
    outcomes are tallied.
    """
    D = as_values(row)
    K, total = int(K), int(total_selections)
    if K < 1:
        raise ValueError("K must be at least 1")
    if total < K:
        raise ValueError(f"total selections ({total}) must be at least K ({K})")
    policy = ThresholdPolicy(float(w))
    if oracle is None:
        if D.max() > 0:
            oracle = win_probabilities(D, compute_threshold(D, policy))
        else:
            oracle = WinProbabilityVector(np.zeros(D.size), 1.0)
    t0 = time.perf_counter()
    counts, rejected = tally_identical_rows(D, policy, seed, K, total, workers=workers)
    elapsed = time.perf_counter() - t0
    law = np.append(oracle.per_reaction, oracle.reject)
    observed = np.append(counts, rejected)
    max_z, z_bins = max_z_score(observed, law, total)
    chi2, chi2_p, dof = pooled_chisquare(observed, law)
    has_sel = counts.sum() > 0
    has_law = oracle.per_reaction.sum() > 0
    return ValidationReport(
        distribution=distribution,
        M=D.size,
        K=K,
        w=float(w),
        seed=int(seed),
        total_selections=total,
        counts=counts,
        rejections=rejected,
        mse_vs_propensity=mse_normalized(D, counts) if has_sel else math.nan,
        mse_vs_oracle=(mse_normalized(oracle.per_reaction, counts)
                       if has_sel and has_law else math.nan),
        max_z_vs_oracle=max_z,
        z_bins=z_bins,
        chi2=chi2,
        chi2_p=chi2_p,
        chi2_dof=dof,
        bias_floor=mse_normalized(D, oracle.per_reaction) if has_law else math.nan,
        oracle_reject=oracle.reject,
        repeat=repeat,
        elapsed_s=elapsed,
    )


def run_grid(distributions, Ks=TABLE_K, ws=TABLE_W, total_selections=10_000_000, seed=0,
             repeats=1, workers=1, progress=None):
    """Every (distribution, K, w, repeat) cell; repeat r uses ``seed + r``.

    ``distributions`` maps a label to a row.  The oracle is computed once
    per (distribution, w).
    """
    reports = []
    for name, row in distributions.items():
        D = as_values(row)
        for w in ws:
            oracle = win_probabilities(D, compute_threshold(D, ThresholdPolicy(float(w))))
            for K in Ks:
                for r in range(repeats):
                    rep = run_selection_experiment(
                        D, K, total_selections, w, seed + r, workers, name, r, oracle)
                    reports.append(rep)
                    if progress:
                        progress(rep)
    return reports


def write_grid_csv(reports, path, header=None):
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(f"# {header}\n")
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(GRID_COLUMNS)
        for rep in reports:
            out.writerow(rep.grid_row())


def write_reports_json(reports, path, config=None):
    """Per-run reports plus the worst (largest) MSE per cell over repeats."""
    worst = {}
    for rep in reports:
        key = (rep.distribution, rep.K, rep.w)
        cur = worst.setdefault(key, dict(distribution=rep.distribution, K=rep.K, M=rep.M,
                                          w=rep.w, max_mse_vs_propensity=-math.inf,
                                          max_mse_vs_oracle=-math.inf, rejections=0))
        cur["max_mse_vs_propensity"] = max(cur["max_mse_vs_propensity"], rep.mse_vs_propensity)
        cur["max_mse_vs_oracle"] = max(cur["max_mse_vs_oracle"], rep.mse_vs_oracle)
        cur["rejections"] += rep.rejections
    doc = {
        "config": config or {},
        "runs": [
            {k: v for k, v in rep.as_dict().items() if k != "elapsed_s"} for rep in reports
        ],
        "worst_over_repeats": list(worst.values()),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def bench_select(M, K, rounds, workers=1, repeats=10, seed=0, row=None):
    """Wall time of ``rounds`` batched AR selections over K realizations.

    Uses the Gaussian test row of size M unless ``row`` is given.  The
    kernel is compiled before timing.  Returns a dict with the mean and
    standard deviation over ``repeats`` runs and the mean cost per selection.
    """
    from .model import gen_discrete_gaussian

    for name, v in (("M", M), ("K", K), ("rounds", rounds), ("workers", workers),
                    ("repeats", repeats)):
        if int(v) < 1:
            raise ValueError(f"{name} must be at least 1")
    if row is not None:
        D = as_values(row)
    else:
        D = as_values(gen_discrete_gaussian(M)) if M >= 2 else np.ones(1)
    policy = ThresholdPolicy(1.0)
    tally_identical_rows(D, policy, seed, 1, 1)
    times = []
    for _ in range(int(repeats)):
        t0 = time.perf_counter()
        tally_identical_rows(D, policy, seed, int(K), int(K) * int(rounds), workers=int(workers))
        times.append(time.perf_counter() - t0)
    t = np.array(times)
    return {
        "M": int(D.size), "K": int(K), "rounds": int(rounds), "workers": int(workers),
        "repeats": int(repeats), "mean_s": float(t.mean()), "std_s": float(t.std(ddof=1)) if t.size > 1 else 0.0,
        "per_selection_s": float(t.mean() / (int(K) * int(rounds))),
    }
