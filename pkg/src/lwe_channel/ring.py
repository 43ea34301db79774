"""Arithmetic in R_q = Z_q[x]/(x^n + 1) and seeded noise samplers.

Multiplication is schoolbook negacyclic convolution; it is the reference
path that any vectorized engine must match bit for bit.  Samplers draw from
a numpy Generator with a documented layout: one integers() call per logical
object, coefficient-major, so that a fixed seed fully determines the stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .params import ParamSet

Seed = Union[bytes, int, np.random.Generator]


def make_rng(seed: Seed) -> np.random.Generator:
    """Turn an opaque seed (bytes or int) into a Generator; pass Generators through."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (bytes, bytearray)):
        seed = int.from_bytes(bytes(seed), "big")
    if not isinstance(seed, int) or seed < 0:
        raise TypeError(f"seed must be bytes, a nonnegative int, or a Generator: {seed!r}")
    return np.random.default_rng(np.random.SeedSequence(seed))


def center(z: int, q: int) -> int:
    """Representative of z mod q in [-floor(q/2), floor(q/2)] (q/2 maps to +q/2)."""
    z %= q
    return z if z <= q // 2 else z - q


@dataclass(frozen=True)
class RingElement:
    """A polynomial of R_q, coefficients reduced to [0, q-1]."""

    coeffs: tuple[int, ...]
    param: ParamSet

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.param.n:
            raise ValueError(f"expected {self.param.n} coefficients, got {len(self.coeffs)}")
        q = self.param.q
        if any(not 0 <= c < q for c in self.coeffs):
            raise ValueError("coefficient out of range [0, q)")

    @classmethod
    def from_ints(cls, values: Sequence[int], param: ParamSet) -> "RingElement":
        q = param.q
        return cls(tuple(int(v) % q for v in values), param)

    @classmethod
    def zero(cls, param: ParamSet) -> "RingElement":
        return cls((0,) * param.n, param)

    def centered(self) -> tuple[int, ...]:
        q = self.param.q
        return tuple(center(c, q) for c in self.coeffs)

    def __add__(self, other: "RingElement") -> "RingElement":
        return ring_add(self, other)

    def __sub__(self, other: "RingElement") -> "RingElement":
        return ring_sub(self, other)

    def __mul__(self, other: "RingElement") -> "RingElement":
        return ring_mul(self, other)

    def __neg__(self) -> "RingElement":
        q = self.param.q
        return RingElement(tuple((-c) % q for c in self.coeffs), self.param)


@dataclass(frozen=True)
class RingVector:
    """A length-l vector of ring elements."""

    elems: tuple[RingElement, ...]

    def __post_init__(self) -> None:
        if not self.elems:
            raise ValueError("empty vector")
        param = self.elems[0].param
        if len(self.elems) != param.l:
            raise ValueError(f"expected {param.l} elements, got {len(self.elems)}")
        if any(e.param is not param and e.param != param for e in self.elems):
            raise ValueError("mixed parameter sets in vector")

    @property
    def param(self) -> ParamSet:
        return self.elems[0].param

    def __add__(self, other: "RingVector") -> "RingVector":
        return RingVector(tuple(a + b for a, b in zip(self.elems, other.elems)))


def _check_same(a: RingElement, b: RingElement) -> None:
    if a.param != b.param:
        raise ValueError("mismatched parameter sets")


def ring_add(a: RingElement, b: RingElement) -> RingElement:
    _check_same(a, b)
    q = a.param.q
    return RingElement(tuple((x + y) % q for x, y in zip(a.coeffs, b.coeffs)), a.param)


def ring_sub(a: RingElement, b: RingElement) -> RingElement:
    _check_same(a, b)
    q = a.param.q
    return RingElement(tuple((x - y) % q for x, y in zip(a.coeffs, b.coeffs)), a.param)


def ring_mul(a: RingElement, b: RingElement) -> RingElement:
    """Schoolbook negacyclic product: x^n = -1."""
    _check_same(a, b)
    n, q = a.param.n, a.param.q
    acc = [0] * n
    bc = b.coeffs
    for i, ai in enumerate(a.coeffs):
        if not ai:
            continue
        for j, bj in enumerate(bc):
            if not bj:
                continue
            t = i + j
            if t < n:
                acc[t] += ai * bj
            else:
                acc[t - n] -= ai * bj
    return RingElement(tuple(c % q for c in acc), a.param)


def ring_dot(a: RingVector, b: RingVector) -> RingElement:
    """Inner product of two vectors over R_q."""
    if len(a.elems) != len(b.elems):
        raise ValueError("mismatched vector lengths")
    out = ring_mul(a.elems[0], b.elems[0])
    for x, y in zip(a.elems[1:], b.elems[1:]):
        out = ring_add(out, ring_mul(x, y))
    return out


# ----- samplers -----------------------------------------------------------
#
# Stream layout (fixed contract):
#   * sample_uniform:        one integers(0, q, size=n) call
#   * sample_cbd:            one integers(0, 2, size=(n, 2k)) call;
#                            coefficient j = sum(bits[j, :k]) - sum(bits[j, k:])
#   * sample_cbd_vector:     one integers(0, 2, size=(l, n, 2k)) call
#   * sample_uniform_matrix: one integers(0, q, size=(l, l, n)) call, row-major
# Each coefficient's bits are contiguous (coefficient-major order).


def cbd_from_bits(bits: np.ndarray, k: int) -> np.ndarray:
    """Fold a (..., 2k) array of fair bits into centered binomial values."""
    if bits.shape[-1] != 2 * k:
        raise ValueError(f"expected trailing dimension {2 * k}, got {bits.shape[-1]}")
    return bits[..., :k].sum(axis=-1) - bits[..., k:].sum(axis=-1)


def sample_uniform(param: ParamSet, seed: Seed) -> RingElement:
    rng = make_rng(seed)
    vals = rng.integers(0, param.q, size=param.n, dtype=np.int64)
    return RingElement(tuple(int(v) for v in vals), param)


def sample_cbd(param: ParamSet, seed: Seed) -> RingElement:
    rng = make_rng(seed)
    bits = rng.integers(0, 2, size=(param.n, 2 * param.k), dtype=np.int64)
    vals = cbd_from_bits(bits, param.k)
    return RingElement.from_ints(vals, param)


def sample_cbd_vector(param: ParamSet, seed: Seed) -> RingVector:
    rng = make_rng(seed)
    bits = rng.integers(0, 2, size=(param.l, param.n, 2 * param.k), dtype=np.int64)
    vals = cbd_from_bits(bits, param.k)
    return RingVector(tuple(RingElement.from_ints(row, param) for row in vals))


def sample_uniform_matrix(param: ParamSet, seed: Seed) -> tuple[tuple[RingElement, ...], ...]:
    """An l x l matrix over R_q, row-major."""
    rng = make_rng(seed)
    vals = rng.integers(0, param.q, size=(param.l, param.l, param.n), dtype=np.int64)
    return tuple(
        tuple(RingElement(tuple(int(c) for c in poly), param) for poly in row)
        for row in vals
    )


__all__ = [
    "RingElement",
    "RingVector",
    "Seed",
    "cbd_from_bits",
    "center",
    "make_rng",
    "ring_add",
    "ring_dot",
    "ring_mul",
    "ring_sub",
    "sample_cbd",
    "sample_cbd_vector",
    "sample_uniform",
    "sample_uniform_matrix",
]
