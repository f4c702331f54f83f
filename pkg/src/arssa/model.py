"""Propensity distributions, reaction networks and mass-action propensities.

Rows and matrices are thin read-only wrappers around float64 arrays; every
function in the package that takes a row also accepts a plain array-like.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateDistributionError,
    DistributionFormatError,
    InvalidSizeError,
    NetworkFormatError,
)

__all__ = [
    "PropensityRow",
    "PropensityMatrix",
    "Reaction",
    "ReactionNetwork",
    "RealizationState",
    "RUNNING",
    "HALTED",
    "as_values",
    "gen_discrete_gaussian",
    "compute_propensities",
    "compute_propensities_batch",
    "load_propensity_row",
    "save_propensity_row",
    "load_network",
    "network_from_dict",
]

RUNNING = "running"
HALTED = "halted"


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PropensityRow:
    """M non-negative, finite propensities of one realization."""

    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 1 or v.size < 1:
            raise InvalidSizeError("a propensity row needs at least one value")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("propensities must be finite and non-negative")
        object.__setattr__(self, "values", v)

    @property
    def total(self):
        return float(self.values.sum())

    @property
    def M(self):
        return self.values.size

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __eq__(self, other):
        return isinstance(other, PropensityRow) and np.array_equal(self.values, other.values)

    def scaled(self, c):
        return PropensityRow(self.values * c)


@dataclass(frozen=True, eq=False)
class PropensityMatrix:
    """K rows of equal length M, one per realization."""

    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise InvalidSizeError("a propensity matrix needs shape (K>=1, M>=1)")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("propensities must be finite and non-negative")
        object.__setattr__(self, "values", v)

    @classmethod
    def replicate(cls, row, K):
        """K identical copies of ``row``."""
        return cls(np.broadcast_to(as_values(row), (K, len(as_values(row)))))

    @property
    def K(self):
        return self.values.shape[0]

    @property
    def M(self):
        return self.values.shape[1]

    def row(self, k):
        return PropensityRow(self.values[k])

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def as_values(row):
    """float64 view of a row-like, validated non-negative and finite."""
    if isinstance(row, (PropensityRow, PropensityMatrix)):
        return row.values
    a = np.asarray(row, dtype=np.float64)
    if a.size < 1:
        raise InvalidSizeError("empty propensity input")
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise ValueError("propensities must be finite and non-negative")
    return a


def gen_discrete_gaussian(M, scale=1e5):
    """Standard normal density sampled on M equispaced points of [-5, 5].

    Value ``j`` is ``phi(-5 + 10 j / (M - 1)) * scale``.  The grid is built
    symmetrically so that value ``j`` equals value ``M - 1 - j`` bit for bit.
    """
    M = int(M)
    if M < 2:
        raise InvalidSizeError(f"M must be at least 2, got {M}")
    j = np.arange(M, dtype=np.float64)
    x = -5.0 + j * (10.0 / (M - 1))
    # mirror the right half so |x_j| == |x_{M-1-j}| exactly
    half = M // 2
    x[M - half:] = -x[:half][::-1]
    if M % 2:
        x[half] = 0.0
    return PropensityRow(np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi) * scale)


def load_propensity_row(path):
    """Read one non-negative real per line; ``#`` lines are comments."""
    values = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            v = float(s)
        except ValueError:
            raise DistributionFormatError(f"not a number: {s!r}", lineno) from None
        if not math.isfinite(v):
            raise DistributionFormatError(f"non-finite value {s!r}", lineno)
        if v < 0:
            raise DistributionFormatError(f"negative propensity {v!r}", lineno)
        values.append(v)
    if not values:
        raise InvalidSizeError(f"{path}: no propensity values")
    return PropensityRow(values)


def save_propensity_row(row, path, header=None):
    """Write ``row`` one value per line at round-trip precision."""
    lines = [] if header is None else [f"# {header}"]
    lines += [repr(float(v)) for v in as_values(row)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class Reaction:
    name: str
    rate: float
    reactants: dict = field(default_factory=dict)
    products: dict = field(default_factory=dict)

    @property
    def order(self):
        return sum(self.reactants.values())


@dataclass(frozen=True, eq=False)
class ReactionNetwork:
    """Species with initial counts and mass-action reactions of order <= 2.

    Change vectors are derived from the stoichiometry, so they are always
    consistent with it.  ``stoich`` has shape (M, N).
    """

    species: tuple
    initial: tuple
    reactions: tuple

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "initial", tuple(int(x) for x in self.initial))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        if not self.species:
            raise NetworkFormatError("network has no species")
        if not self.reactions:
            raise NetworkFormatError("network has no reactions")
        if len(set(self.species)) != len(self.species):
            raise NetworkFormatError("duplicate species names")
        if len(self.initial) != len(self.species):
            raise NetworkFormatError("one initial count per species is required")
        if any(x < 0 for x in self.initial):
            raise NetworkFormatError("initial counts must be non-negative")
        index = {s: i for i, s in enumerate(self.species)}
        N, M = len(self.species), len(self.reactions)
        stoich = np.zeros((M, N), dtype=np.int64)
        # (rate, first reactant, second reactant) with -1 for "absent"
        r1 = np.full(M, -1, dtype=np.int64)
        r2 = np.full(M, -1, dtype=np.int64)
        for m, rx in enumerate(self.reactions):
            if not (math.isfinite(rx.rate) and rx.rate >= 0):
                raise NetworkFormatError(f"{rx.name}: rate must be finite and >= 0")
            for side, sign in ((rx.reactants, -1), (rx.products, 1)):
                for s, n in side.items():
                    if s not in index:
                        raise NetworkFormatError(f"{rx.name}: unknown species {s!r}")
                    if int(n) != n or n < 1:
                        raise NetworkFormatError(f"{rx.name}: stoichiometry must be a positive integer")
                    stoich[m, index[s]] += sign * int(n)
            if rx.order > 2:
                raise NetworkFormatError(f"{rx.name}: only orders 0, 1 and 2 are supported")
            slots = [index[s] for s, n in rx.reactants.items() for _ in range(int(n))]
            if slots:
                r1[m] = slots[0]
            if len(slots) == 2:
                r2[m] = slots[1]
        for a in (stoich, r1, r2):
            a.setflags(write=False)
        object.__setattr__(self, "stoich", stoich)
        object.__setattr__(self, "_r1", r1)
        object.__setattr__(self, "_r2", r2)
        object.__setattr__(self, "rates", _frozen([rx.rate for rx in self.reactions]))

    @property
    def N(self):
        return len(self.species)

    @property
    def M(self):
        return len(self.reactions)

    def initial_state(self):
        return RealizationState(np.array(self.initial, dtype=np.int64), 0.0, RUNNING)


@dataclass(frozen=True, eq=False)
class RealizationState:
    counts: np.ndarray
    time: float = 0.0
    status: str = RUNNING

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64)
        if np.any(c < 0):
            raise ValueError("species counts must be non-negative")
        if not self.time >= 0:
            raise ValueError("time must be non-negative")
        if self.status not in (RUNNING, HALTED):
            raise ValueError(f"unknown status {self.status!r}")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)


def compute_propensities_batch(network, counts):
    """Mass-action propensities for a (K, N) block of counts -> (K, M)."""
    X = np.asarray(counts, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    K = X.shape[0]
    h = np.ones((K, network.M), dtype=np.float64)
    r1, r2 = network._r1, network._r2
    for m in range(network.M):
        a, b = r1[m], r2[m]
        if a < 0:
            continue
        xa = X[:, a]
        if b < 0:
            h[:, m] = xa
        elif a == b:
            h[:, m] = xa * (xa - 1.0) / 2.0
        else:
            h[:, m] = xa * X[:, b]
    return h * network.rates


def compute_propensities(network, state):
    """Mass-action propensity row for a single realization state."""
    counts = state.counts if isinstance(state, RealizationState) else state
    return PropensityRow(compute_propensities_batch(network, counts)[0])


_TOP_KEYS = {"name", "species", "reactions"}
_SPECIES_KEYS = {"name", "initial"}
_REACTION_KEYS = {"name", "rate", "reactants", "products"}


def _check_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise NetworkFormatError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise NetworkFormatError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise NetworkFormatError(f"{where}: missing field(s) {sorted(missing)}")


def network_from_dict(doc):
    """Build a network from the JSON document layout (see README)."""
    _check_keys(doc, _TOP_KEYS, {"species", "reactions"}, "network")
    species, initial, reactions = [], [], []
    for i, sp in enumerate(doc["species"]):
        _check_keys(sp, _SPECIES_KEYS, _SPECIES_KEYS, f"species[{i}]")
        species.append(str(sp["name"]))
        initial.append(sp["initial"])
    for i, rx in enumerate(doc["reactions"]):
        _check_keys(rx, _REACTION_KEYS, {"name", "rate"}, f"reactions[{i}]")
        reactions.append(
            Reaction(
                name=str(rx["name"]),
                rate=float(rx["rate"]),
                reactants=dict(rx.get("reactants", {})),
                products=dict(rx.get("products", {})),
            )
        )
    for x in initial:
        if isinstance(x, bool) or not isinstance(x, int):
            raise NetworkFormatError("initial counts must be integers")
    return ReactionNetwork(species, initial, reactions)


def load_network(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"network file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"{path}: {exc}") from None
    return network_from_dict(doc)


def require_positive_total(values):
    total = float(np.sum(values))
    if not total > 0:
        raise DegenerateDistributionError("propensity distribution has zero total")
    return total
