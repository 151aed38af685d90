"""Counter-based random numbers.

Every random quantity in the package is a pure function of a 64-bit seed and
integer counters (site coordinates, sample indices, move indices).  That makes
any value reproducible in isolation — no generator state is carried around, so
parallel workers and re-runs agree exactly regardless of evaluation order.

The word pipeline (splitmix64 finalizer applied to keyed counters) runs in the
selected kernel backend; the uniform→normal transform lives here, in shared
numpy code, so the compiled and pure backends emit bit-identical samples.
"""

import math

import numpy as np

from . import _kernels

MASK64 = (1 << 64) - 1

_ADD = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

C0 = 0xA0761D6478BD642F
C1 = 0xE7037ED1A0B428DB
C2 = 0x8EBC6AF09C88C6E3
C3 = 0x589965CC75374CC3
C4 = 0x1D8E4E27C47D124F

_TWO_PI = 2.0 * math.pi
_INV_2_53 = 2.0 ** -53


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit word."""
    z = (z + _ADD) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def seed_base(seed: int) -> int:
    """First mixing stage shared by every per-site evaluation."""
    return mix64((seed & MASK64) ^ C0)


def derive_seed(master: int, *indices: int) -> int:
    """Fold integer indices into a child seed (for samples, cells, moves)."""
    z = seed_base(master)
    for k in indices:
        z = mix64(z ^ (k & MASK64))
    return z


def site_words(seed: int, xs, ys):
    """Two independent 64-bit words per lattice site."""
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    ys = np.ascontiguousarray(ys, dtype=np.int64)
    a = np.empty(xs.shape[0], dtype=np.uint64)
    b = np.empty(xs.shape[0], dtype=np.uint64)
    _kernels.words_block(seed_base(seed), xs, ys, a, b)
    return a, b


def _word_to_unit(w):
    # open-interval uniform from the top 53 bits: never 0, never 1
    return ((w >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


def normals(seed: int, xs, ys):
    """One standard normal per site via Box–Muller (cosine branch)."""
    a, b = site_words(seed, xs, ys)
    u1 = _word_to_unit(a)
    u2 = _word_to_unit(b)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def uniforms(seed: int, xs, ys):
    """One uniform(0,1) per site (used by the annealer's accept tests)."""
    a, _ = site_words(seed, xs, ys)
    return _word_to_unit(a)
