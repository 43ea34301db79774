"""Lossy d-bit coefficient compression and its exact noise law.

Compression maps Z_q onto Z_{2^d} and back; the reconstruction error
(decompress(compress(z)) - z) mod q is the deterministic image of a uniform
coefficient, so its law is an exact histogram with denominator q.
"""

from __future__ import annotations

from fractions import Fraction

from .pmf import DEFAULT_PRECISION, Pmf


def round_half_up_div(num: int, den: int) -> int:
    """Nearest integer to num/den with halves rounded up; num >= 0, den > 0."""
    if num < 0 or den <= 0:
        raise ValueError(f"need num >= 0 and den > 0, got {num}/{den}")
    return (2 * num + den) // (2 * den)


def _check_dq(d: int, q: int) -> None:
    if d < 0:
        raise ValueError(f"d must be >= 0, got {d}")
    if d > 0 and 2 ** d >= q:
        raise ValueError(f"2^d < q violated: d={d}, q={q}")


def compress(z: int, d: int, q: int) -> int:
    """Round z * 2^d / q to the nearest integer (halves up), reduced mod 2^d.

    d = 0 means the coefficient is not compressed; z passes through unchanged.
    """
    _check_dq(d, q)
    if not 0 <= z < q:
        raise ValueError(f"z out of range [0, {q}): {z}")
    if d == 0:
        return z
    return round_half_up_div(z << d, q) % (1 << d)


def decompress(z: int, d: int, q: int) -> int:
    """Round z * q / 2^d to the nearest integer (halves up); identity for d = 0."""
    _check_dq(d, q)
    hi = q if d == 0 else 1 << d
    if not 0 <= z < hi:
        raise ValueError(f"compressed value out of range [0, {hi}): {z}")
    if d == 0:
        return z
    return round_half_up_div(z * q, 1 << d)


def preimage_partition(d: int, q: int) -> list[list[int]]:
    """For each compressed value z', the sorted residues z with compress(z)=z'.

    The lists partition 0..q-1.  For d = 0 compression is the identity, so the
    partition is the q singletons.
    """
    _check_dq(d, q)
    if d == 0:
        return [[z] for z in range(q)]
    buckets: list[list[int]] = [[] for _ in range(1 << d)]
    for z in range(q):
        buckets[compress(z, d, q)].append(z)
    return buckets


def compression_noise_pmf(d: int, q: int, backend: str = "float",
                          precision: int = DEFAULT_PRECISION) -> Pmf:
    """Law of (decompress(compress(z)) - z) mod q for z uniform on Z_q.

    d = 0 means the coefficient is transmitted uncompressed, so the noise is
    the point mass at 0.  For d >= 1 the support lies in the centered ball of
    radius floor(q / 2^(d+1)) + 1.
    """
    _check_dq(d, q)
    if d == 0:
        return Pmf.delta(q, 0, backend, precision)
    counts = [0] * q
    for z in range(q):
        err = (decompress(compress(z, d, q), d, q) - z) % q
        counts[err] += 1
    fr = [Fraction(c, q) for c in counts]
    pmf = Pmf.from_fractions(q, fr, backend, precision)
    radius = q // (1 << (d + 1)) + 1
    half = q // 2
    for i in pmf.support():
        c = i if i <= half else i - q
        if abs(c) > radius:
            raise AssertionError(
                f"reconstruction error {c} outside radius {radius} for d={d}, q={q}"
            )
    return pmf


__all__ = [
    "compress",
    "compression_noise_pmf",
    "decompress",
    "preimage_partition",
    "round_half_up_div",
]
