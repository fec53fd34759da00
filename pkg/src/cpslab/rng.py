"""Seeded, replayable random streams.

All randomness in the package comes from one generator: SplitMix64 used as
a counter-based generator. Draw number ``k`` (0-based) of the stream with
seed ``s`` is::

    mix64(s + (k + 1) * 0x9E3779B97F4A7C15)  (mod 2**64)

where ``mix64`` is the SplitMix64 finalizer. Because every draw is a pure
function of ``(seed, counter)``, the numpy path used here and the numba
kernels in :mod:`cpslab.dynamics` produce bit-identical raw draws, and a
run can be replayed from any counter position.

Derived quantities, each consuming exactly one raw draw:

* uniform in [0, 1): ``(u64 >> 11) * 2**-53``
* integer in [0, n): ``floor(uniform * n)``
* exponential(rate): ``-log1p(-uniform) / rate``
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO_M53 = 1.0 / 9007199254740992.0

_MASK64 = (1 << 64) - 1


def _mix64_py(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, k: int) -> int:
    """Seed for replica ``k`` of an experiment with master ``seed``.

    This is draw ``k`` of the master stream. ``mix64`` is a bijection and
    ``seed + (k+1)*gamma`` is injective in ``k`` (gamma is odd), so distinct
    replicas always get distinct seeds.
    """
    if k < 0:
        raise ValueError("replica index must be non-negative")
    return _mix64_py(seed + (k + 1) * int(GOLDEN_GAMMA))


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def draw_u01(key, counter):
    """Uniform draw number ``counter`` of stream ``key`` (numba side)."""
    z = mix64(key + (counter + _ONE) * GOLDEN_GAMMA)
    return float(z >> _S11) * _TWO_M53


@njit(cache=True, inline="always")
def draw_exp(key, counter, rate):
    return -math.log1p(-draw_u01(key, counter)) / rate


class RngStream:
    """Single-owner replayable stream over SplitMix64.

    ``counter`` is the number of raw draws consumed so far. Kernels that
    take ``(rng.key, rng.counter)`` must hand back the advanced counter via
    :meth:`advance`.
    """

    def __init__(self, seed: int, counter: int = 0):
        if not 0 <= seed < 2**64:
            seed &= _MASK64
        self.seed = int(seed)
        self.counter = int(counter)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, counter={self.counter})"

    @property
    def key(self) -> np.uint64:
        return np.uint64(self.seed)

    def advance(self, counter: int) -> None:
        if counter < self.counter:
            raise ValueError("stream counter cannot move backwards")
        self.counter = int(counter)

    def raw(self, n: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + 1 + n, dtype=np.uint64)
        out = _mix64_np(np.uint64(self.seed) + idx * GOLDEN_GAMMA)
        self.counter += n
        return out

    def uniform(self, n: int | None = None):
        u = (self.raw(1 if n is None else n) >> _S11).astype(np.float64) * _TWO_M53
        return float(u[0]) if n is None else u

    def integers(self, high: int, n: int | None = None):
        if high < 1:
            raise ValueError("high must be >= 1")
        u = self.uniform(1 if n is None else n)
        k = np.floor(u * high).astype(np.int64)
        return int(k[0]) if n is None else k

    def exponential(self, rate: float = 1.0, n: int | None = None):
        if rate <= 0:
            raise ValueError("rate must be positive")
        u = self.uniform(1 if n is None else n)
        x = -np.log1p(-u) / rate
        return float(x[0]) if n is None else x

    def spawn(self, k: int) -> "RngStream":
        return RngStream(derive_seed(self.seed, k))
