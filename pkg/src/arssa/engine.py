"""Batched Gillespie SSA with a pluggable next-reaction selector.

All running realizations advance one reaction per round.  Realization k at
its s-th step uses

* ``(k, "tau")`` counter ``s`` for the waiting time,
* ``(k, "election")`` counters ``s*M .. s*M + M - 1`` for AR selection,
* ``(k, "retry")`` counters ``(s*R + a)*M + j`` for the a-th AR retry,
  where R is ``max_retries``,
* ``(k, "select")`` counter ``s`` for IT selection,

so a run is a pure function of its configuration and seed.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, DegenerateDistributionError
from .model import (
    HALTED,
    RUNNING,
    RealizationState,
    compute_propensities_batch,
)
from .rng import stream_keys, uniform_array
from .select_ar import REJECTED, ThresholdPolicy, row_thresholds, select_rows
from .select_it import inverse_transform_select_batch

__all__ = [
    "StepRecord",
    "BatchRun",
    "SELECTORS",
    "sample_tau",
    "step",
    "run_batch",
    "write_summary_csv",
    "write_trajectory_csv",
]

SELECTORS = ("ar", "it")

# generator zero is replaced by the smallest positive value on its 2**-53 grid
_SMALLEST_DRAW = 2.0 ** -53

HALT_NONE = ""
HALT_NO_PROPENSITY = "no-propensity"
HALT_TIME = "t-end"
HALT_RETRIES = "retries-exhausted"


@dataclass(frozen=True)
class StepRecord:
    tau: float
    selected: int
    u1: float


def sample_tau(alpha0, u1):
    """Waiting time ``ln(1/u1) / alpha0``."""
    if not alpha0 > 0:
        raise DegenerateDistributionError("total propensity must be positive")
    if not 0.0 < u1 < 1.0:
        raise ValueError("u1 must lie in the open interval (0, 1)")
    return math.log(1.0 / u1) / alpha0


class _Streams:
    def __init__(self, seed, ks):
        self.election = stream_keys(seed, ks, "election")
        self.retry = stream_keys(seed, ks, "retry")
        self.tau = stream_keys(seed, ks, "tau")
        self.select = stream_keys(seed, ks, "select")


def _select(D, idx, steps, streams, selector, policy, max_retries, workers):
    """Winners for rows ``D`` (realizations ``idx``); returns (sel, rejections)."""
    if selector == "it":
        u2 = uniform_array(streams.select[idx], steps)
        return inverse_transform_select_batch(D, u2), np.zeros(len(idx), dtype=np.int64)
    T = row_thresholds(D, policy)
    sel = select_rows(D, T, streams.election[idx], steps, workers=workers)
    rejections = (sel == REJECTED).astype(np.int64)
    for attempt in range(max_retries):
        again = np.flatnonzero(sel == REJECTED)
        if again.size == 0:
            break
        counters = steps[again].astype(np.uint64) * np.uint64(max_retries) + np.uint64(attempt)
        sel[again] = select_rows(D[again], T[again], streams.retry[idx[again]], counters,
                                 workers=workers)
        rejections[again] += sel[again] == REJECTED
    return sel, rejections


def _advance(network, counts, times, steps, idx, t_end, streams, selector, policy,
             max_retries, workers):
    """One SSA step for realizations ``idx``; mutates the state arrays.

    Returns ``(fired, taus, sel, u1, halt_reasons, rejections)`` aligned with
    ``idx``; ``fired`` is False for realizations that halted without firing.
    """
    D = compute_propensities_batch(network, counts[idx])
    a0 = D.sum(axis=1)
    n = len(idx)
    reasons = np.full(n, HALT_NONE, dtype=object)
    sel = np.full(n, REJECTED, dtype=np.int64)
    taus = np.zeros(n)
    u1 = np.zeros(n)
    rejections = np.zeros(n, dtype=np.int64)
    live = a0 > 0
    reasons[~live] = HALT_NO_PROPENSITY
    if live.any():
        li = idx[live]
        s, rej = _select(D[live], li, steps[li], streams, selector, policy, max_retries, workers)
        rejections[live] = rej
        sel[live] = s
        lost = live.copy()
        lost[live] = s == REJECTED
        reasons[lost] = HALT_RETRIES
        live &= ~lost
    fi = idx[live]
    if fi.size:
        u = uniform_array(streams.tau[fi], steps[fi])
        u[u == 0.0] = _SMALLEST_DRAW
        tau = np.log(1.0 / u) / a0[live]
        new = counts[fi] + network.stoich[sel[live]]
        if np.any(new < 0):
            raise ConsistencyError("a reaction fired without sufficient reactants")
        counts[fi] = new
        times[fi] += tau
        steps[fi] += 1
        taus[live] = tau
        u1[live] = u
        reasons[live & (times[idx] >= t_end)] = HALT_TIME
    return live, taus, sel, u1, reasons, rejections


def step(network, state, selector="ar", policy=ThresholdPolicy(), seed=0, k=0,
         step_index=0, max_retries=100, t_end=math.inf):
    """Advance a single realization by one reaction.

    Returns the new state and a :class:`StepRecord`, or ``None`` for the
    record when the realization halted without firing.
    """
    if state.status != RUNNING:
        raise ValueError("cannot step a halted realization")
    _check_selector(selector)
    counts = np.array(state.counts, dtype=np.int64)[None, :]
    times = np.array([state.time])
    steps = np.array([step_index], dtype=np.int64)
    idx = np.array([0])
    streams = _Streams(seed, [k])
    fired, taus, sel, u1, reasons, _ = _advance(
        network, counts, times, steps, idx, t_end, streams, selector,
        _as_policy(policy), max_retries, 1,
    )
    status = HALTED if reasons[0] else RUNNING
    new_state = RealizationState(counts[0], float(times[0]), status)
    if not fired[0]:
        return new_state, None
    return new_state, StepRecord(float(taus[0]), int(sel[0]), float(u1[0]))


@dataclass(eq=False)
class BatchRun:
    """Outcome of :func:`run_batch`.

    ``trajectory`` (when recorded) holds parallel arrays ``realization``,
    ``time``, ``counts``; ``time_average`` holds the time-weighted mean
    counts over ``average_window``.
    """

    species: tuple
    counts: np.ndarray
    times: np.ndarray
    steps: np.ndarray
    rejections: np.ndarray
    halt_reason: np.ndarray
    seed: int
    selector: str
    policy: ThresholdPolicy
    t_end: float
    trajectory: dict = None
    time_average: np.ndarray = None
    average_window: tuple = None
    config: dict = field(default_factory=dict)

    @property
    def K(self):
        return self.counts.shape[0]

    @property
    def halted(self):
        return self.halt_reason != HALT_NONE

    @property
    def states(self):
        return [
            RealizationState(c, float(t), HALTED if r else RUNNING)
            for c, t, r in zip(self.counts, self.times, self.halt_reason)
        ]


def _check_selector(selector):
    if selector not in SELECTORS:
        raise ValueError(f"selector must be one of {SELECTORS}, got {selector!r}")


def _as_policy(policy):
    return policy if isinstance(policy, ThresholdPolicy) else ThresholdPolicy(float(policy))


def run_batch(network, K, t_end, selector="ar", policy=ThresholdPolicy(), seed=0,
              max_retries=100, workers=1, record_every=None, average_window=None,
              max_rounds=None):
    """Simulate K realizations from the network's initial state until ``t_end``.

    A realization halts when its total propensity vanishes, when its time
    reaches ``t_end`` (the crossing reaction is applied), or when AR
    selection is still rejected after ``max_retries`` fresh elections.
    ``record_every=n`` keeps the initial state and every n-th step.
    """
    K = int(K)
    if K < 1:
        raise ValueError("K must be at least 1")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    _check_selector(selector)
    policy = _as_policy(policy)
    if max_retries < 0:
        raise ValueError("max_retries must be non-negative")
    counts = np.tile(np.array(network.initial, dtype=np.int64), (K, 1))
    times = np.zeros(K)
    steps = np.zeros(K, dtype=np.int64)
    rejections = np.zeros(K, dtype=np.int64)
    reasons = np.full(K, HALT_NONE, dtype=object)
    streams = _Streams(seed, np.arange(K))

    traj = None
    if record_every:
        traj = {"realization": [np.arange(K)], "time": [times.copy()], "counts": [counts.copy()]}
    acc = None
    if average_window is not None:
        w0, w1 = map(float, average_window)
        if not 0 <= w0 < w1 <= t_end:
            raise ValueError("average_window must satisfy 0 <= t0 < t1 <= t_end")
        acc = np.zeros((K, network.N))

    rounds = 0
    idx = np.arange(K)
    while idx.size and (max_rounds is None or rounds < max_rounds):
        t_prev = times[idx].copy()
        c_prev = counts[idx].copy()
        fired, _, _, _, why, rej = _advance(
            network, counts, times, steps, idx, t_end, streams, selector, policy,
            max_retries, workers,
        )
        rejections[idx] += rej
        reasons[idx] = why
        if acc is not None:
            # state held on [t_prev, t_new); a halt without firing holds forever
            t_new = np.where(fired, times[idx], np.inf)
            overlap = np.clip(np.minimum(t_new, w1) - np.maximum(t_prev, w0), 0.0, None)
            acc[idx] += c_prev * overlap[:, None]
        if traj is not None:
            keep = fired & (steps[idx] % record_every == 0)
            ki = idx[keep]
            traj["realization"].append(ki)
            traj["time"].append(times[ki].copy())
            traj["counts"].append(counts[ki].copy())
        idx = idx[why == HALT_NONE]
        rounds += 1

    if traj is not None:
        traj = {key: np.concatenate(v) for key, v in traj.items()}
    config = dict(
        K=K, t_end=float(t_end), selector=selector, w=policy.w, seed=int(seed),
        max_retries=int(max_retries), record_every=record_every,
    )
    return BatchRun(
        species=network.species,
        counts=counts,
        times=times,
        steps=steps,
        rejections=rejections,
        halt_reason=reasons,
        seed=int(seed),
        selector=selector,
        policy=policy,
        t_end=float(t_end),
        trajectory=traj,
        time_average=None if acc is None else acc / (w1 - w0),
        average_window=None if acc is None else (w0, w1),
        config=config,
    )


def write_summary_csv(run, path, header=None):
    """One row per realization: final time, counts, steps, rejections, status."""
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(f"# {header}\n")
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["realization", "time", *run.species, "steps", "rejections", "halt_reason"])
        for k in range(run.K):
            out.writerow([k, repr(float(run.times[k])), *map(int, run.counts[k]),
                          int(run.steps[k]), int(run.rejections[k]), run.halt_reason[k] or "running"])


def write_trajectory_csv(run, path, header=None):
    if run.trajectory is None:
        raise ValueError("run was made without record_every")
    tr = run.trajectory
    order = np.lexsort((tr["time"], tr["realization"]))
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(f"# {header}\n")
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["realization", "time", *run.species])
        for i in order:
            out.writerow([int(tr["realization"][i]), repr(float(tr["time"][i])),
                          *map(int, tr["counts"][i])])
