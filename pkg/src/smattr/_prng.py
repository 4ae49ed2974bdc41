"""Bit-exact xoshiro256** generator, vectorised over independent streams.

Weights of the synthetic oracle are drawn here so that any implementation in
any language can regenerate them. The derivation, all arithmetic mod 2**64:

    mix64(z):
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
        return z ^ (z >> 31)

    splitmix64 with state x: x += 0x9E3779B97F4A7C15; return mix64(x)

    stream_key(seed, tag, r) = mix64(mix64(seed ^ tag) + r)

Stream ``r`` seeds its xoshiro256** state (s0, s1, s2, s3) with the first four
splitmix64 outputs starting from ``x = stream_key(seed, tag, r)``. Each
xoshiro256** step returns ``rotl(s1 * 5, 7) * 9`` and then updates

    t = s1 << 17; s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t
    s3 = rotl(s3, 45)

A 64-bit output ``o`` maps to a double in [0, 1) as ``(o >> 11) * 2**-53``;
``uniform_matrix`` rescales it to [-1, 1) as ``2u - 1`` and stores float32
(round to nearest even). Row ``r`` of a matrix is stream ``r``; column ``j``
is that stream's ``j``-th output.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

TAG_EMBED = 0x454D424544000001
TAG_HEAD = 0x4845414400000002

_U = np.uint64


def mix64(z):
    """splitmix64 finaliser; accepts python ints or uint64 arrays."""
    if isinstance(z, np.ndarray):
        with np.errstate(over="ignore"):
            z = (z ^ (z >> _U(30))) * _U(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> _U(27))) * _U(0x94D049BB133111EB)
        return z ^ (z >> _U(31))
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64_stream(state, count):
    out = []
    for _ in range(count):
        state = (state + GOLDEN_GAMMA) & MASK64
        out.append(mix64(state))
    return out


def _rotl(x, k):
    return (x << _U(k)) | (x >> _U(64 - k))


class Xoshiro256StarStar:
    """``n_streams`` independent xoshiro256** generators advanced in lockstep."""

    def __init__(self, states):
        states = np.asarray(states, dtype=np.uint64)
        if states.ndim != 2 or states.shape[1] != 4:
            raise ValueError("states must have shape (n_streams, 4)")
        if np.any(~states.any(axis=1)):
            raise ValueError("xoshiro256** state must not be all zero")
        self._s = [states[:, i].copy() for i in range(4)]

    @classmethod
    def from_key(cls, seed, tag, n_streams):
        base = mix64((int(seed) ^ tag) & MASK64)
        with np.errstate(over="ignore"):
            x = mix64(_U(base) + np.arange(n_streams, dtype=np.uint64))
            states = np.empty((n_streams, 4), dtype=np.uint64)
            for i in range(4):
                x = x + _U(GOLDEN_GAMMA)
                states[:, i] = mix64(x)
        return cls(states)

    def next_u64(self):
        s0, s1, s2, s3 = self._s
        with np.errstate(over="ignore"):
            result = _rotl(s1 * _U(5), 7) * _U(9)
        t = s1 << _U(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        self._s[3] = _rotl(s3, 45)
        return result

    def next_unit(self):
        return (self.next_u64() >> _U(11)).astype(np.float64) * 2.0**-53


def uniform_matrix(seed, tag, rows, cols):
    """float32 matrix with entries uniform on [-1, 1), one stream per row."""
    gen = Xoshiro256StarStar.from_key(seed, tag, rows)
    out = np.empty((rows, cols), dtype=np.float32)
    for j in range(cols):
        out[:, j] = 2.0 * gen.next_unit() - 1.0
    return out
