"""Counter-based uniform random streams.

Every draw is a pure function of ``(seed, k, purpose, counter)``: the seed
and the stream key ``(k, purpose)`` are folded into a 64-bit Threefry key
and the counter is encrypted under it with Threefry-2x32-20.  No generator
state is ever carried between draws, so any partition of the counters
across workers reproduces the same values.

>>> s = for_realization(seed=7, k=0, purpose="election")
>>> uniform01(s, 3) == uniform01(s, 3)
True
"""

from dataclasses import dataclass

import numba as nb
import numpy as np

__all__ = [
    "PURPOSES",
    "RngStream",
    "for_realization",
    "stream_key",
    "stream_keys",
    "uniform01",
    "uniform_array",
    "threefry2x32",
]

# Stable ids; changing them changes every stream.
PURPOSES = {
    "election": 1,
    "tau": 2,
    "select": 3,
    "retry": 4,
    "bench": 5,
}

_MASK64 = 0xFFFFFFFFFFFFFFFF


def _purpose_id(purpose):
    if isinstance(purpose, str):
        try:
            return PURPOSES[purpose]
        except KeyError:
            raise ValueError(f"unknown stream purpose {purpose!r}") from None
    pid = int(purpose)
    if not 0 <= pid < 256:
        raise ValueError("integer purpose tags must lie in [0, 256)")
    return pid


def _mix64(z):
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _mix64_array(z):
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


def stream_key(seed, k, purpose):
    """64-bit Threefry key for realization ``k`` and ``purpose``.

    For a fixed seed the map ``(k, purpose) -> key`` is injective
    (``k < 2**56``), since both mixing steps are bijections on 64 bits.
    """
    if k < 0 or k >= 1 << 56:
        raise ValueError("realization index must lie in [0, 2**56)")
    base = _mix64(int(seed))
    return _mix64(base + ((int(k) << 8) | _purpose_id(purpose)))


def stream_keys(seed, ks, purpose):
    """Vectorized :func:`stream_key` over an array of realization indices."""
    ks = np.asarray(ks, dtype=np.int64)
    if ks.size and (ks.min() < 0 or ks.max() >= 1 << 56):
        raise ValueError("realization index must lie in [0, 2**56)")
    base = np.uint64(_mix64(int(seed)))
    tagged = (ks.astype(np.uint64) << np.uint64(8)) | np.uint64(_purpose_id(purpose))
    return _mix64_array(base + tagged)


@nb.njit(cache=True, nogil=True)
def _rotl32(x, r):
    r = np.uint64(r)
    return ((x << r) | (x >> (np.uint64(32) - r))) & np.uint64(0xFFFFFFFF)


@nb.njit(cache=True, nogil=True)
def _threefry(k0, k1, c0, c1):
    # Values are carried in uint64 and masked to 32 bits after each add.
    m = np.uint64(0xFFFFFFFF)
    k2 = np.uint64(0x1BD11BDA) ^ k0 ^ k1
    x0 = (c0 + k0) & m
    x1 = (c1 + k1) & m
    # four rounds per key injection, five injections
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 13) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 15) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 26) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 6) ^ x0
    x0 = (x0 + k1) & m; x1 = (x1 + k2 + np.uint64(1)) & m
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 17) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 29) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 16) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 24) ^ x0
    x0 = (x0 + k2) & m; x1 = (x1 + k0 + np.uint64(2)) & m
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 13) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 15) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 26) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 6) ^ x0
    x0 = (x0 + k0) & m; x1 = (x1 + k1 + np.uint64(3)) & m
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 17) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 29) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 16) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 24) ^ x0
    x0 = (x0 + k1) & m; x1 = (x1 + k2 + np.uint64(4)) & m
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 13) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 15) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 26) ^ x0
    x0 = (x0 + x1) & m; x1 = _rotl32(x1, 6) ^ x0
    x0 = (x0 + k2) & m; x1 = (x1 + k0 + np.uint64(5)) & m
    return x0, x1


@nb.njit(cache=True, nogil=True)
def draw(key, counter):
    """Uniform double in [0, 1) for a 64-bit key and 64-bit counter."""
    m = np.uint64(0xFFFFFFFF)
    x0, x1 = _threefry(key & m, key >> np.uint64(32), counter & m, counter >> np.uint64(32))
    bits = ((x0 << np.uint64(32)) | x1) >> np.uint64(11)
    return np.float64(np.int64(bits)) * 1.1102230246251565e-16


@nb.njit(cache=True, nogil=True)
def _draw_many(keys, counters, out):
    for i in range(out.shape[0]):
        out[i] = draw(keys[i], counters[i])


def uniform_array(keys, counters):
    """Elementwise draws for broadcast arrays of keys and counters."""
    keys, counters = np.broadcast_arrays(np.asarray(keys, dtype=np.uint64),
                                         np.asarray(counters, dtype=np.uint64))
    keys = np.ascontiguousarray(keys).ravel()
    flat = np.ascontiguousarray(counters).ravel()
    out = np.empty(flat.shape, dtype=np.float64)
    _draw_many(keys, flat, out)
    return out.reshape(counters.shape)


def threefry2x32(key, counter):
    """Raw Threefry-2x32-20 block: ``((k0, k1), (c0, c1)) -> (x0, x1)``.

    Exposed for known-answer testing against other implementations.
    """
    (k0, k1), (c0, c1) = key, counter
    x0, x1 = _threefry(np.uint64(k0), np.uint64(k1), np.uint64(c0), np.uint64(c1))
    return int(x0), int(x1)


@dataclass(frozen=True)
class RngStream:
    """A keyed stream; draws are indexed by an explicit counter."""

    seed: int
    k: int
    purpose: str

    @property
    def key(self):
        return stream_key(self.seed, self.k, self.purpose)

    def uniform(self, counter):
        return uniform01(self, counter)

    def uniforms(self, counters):
        return uniform_array(np.uint64(self.key), counters)


def for_realization(seed, k, purpose):
    if k < 0:
        raise ValueError("realization index must be non-negative")
    return RngStream(int(seed) & _MASK64, int(k), purpose)


def uniform01(stream, counter):
    """Draw number ``counter`` of ``stream``, in [0, 1)."""
    return float(draw(np.uint64(stream.key), np.uint64(int(counter) & _MASK64)))
