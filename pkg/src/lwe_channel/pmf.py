"""Probability mass functions over Z_q with exact-rational and extended-precision backends.

The float backend stores weights as gmpy2.mpfr values at a configurable
mantissa precision with an effectively unbounded exponent range, so tail
weights at the 2^-40000 scale stay representable without log-domain tricks.
Cyclic convolution is computed exactly: weights are lifted to a common
fixed-point scale, convolved as one big-integer product (Kronecker
substitution), and each output weight is rounded once.  The exact backend
uses Fraction weights and is intended as the small-modulus oracle.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import gmpy2
from gmpy2 import mpfr, mpq, mpz

DEFAULT_PRECISION = 1024

# Near-maximal MPFR exponent range; keeps every tail weight representable.
_EMIN = -4611686018427387903
_EMAX = 4611686018427387903

# Below this modulus the schoolbook integer convolution beats the packing
# overhead of the single-big-multiply path.
_PACKED_CUTOFF = 512


@contextmanager
def context(precision: int = DEFAULT_PRECISION) -> Iterator[gmpy2.context]:
    """Activate a thread-local MPFR context with unbounded exponent range."""
    old = gmpy2.get_context()
    ctx = gmpy2.context(precision=precision, emin=_EMIN, emax=_EMAX)
    gmpy2.set_context(ctx)
    try:
        yield ctx
    finally:
        gmpy2.set_context(old)


def to_fraction(w) -> Fraction:
    """Exact rational value of a weight (mpfr values are finite binary rationals)."""
    if isinstance(w, Fraction):
        return w
    if isinstance(w, int):
        return Fraction(w)
    if w == 0:
        return Fraction(0)
    m, e = w.as_mantissa_exp()
    m, e = int(m), int(e)
    return Fraction(m << e, 1) if e >= 0 else Fraction(m, 1 << -e)


def mpfr_to_hex(w) -> str:
    """Serialize an mpfr weight as a hexadecimal float string, exactly."""
    if w == 0:
        return "0x0p+0"
    m, e = w.as_mantissa_exp()
    m, e = int(m), int(e)
    sign = ""
    if m < 0:
        sign, m = "-", -m
    tz = (m & -m).bit_length() - 1
    m >>= tz
    e += tz
    digits = format(m, "x")
    exp = e + 4 * (len(digits) - 1)
    mant = digits[0] if len(digits) == 1 else f"{digits[0]}.{digits[1:]}"
    return f"{sign}0x{mant}p{exp:+d}"


def hex_to_mpfr(s: str, precision: int):
    """Parse a hexadecimal float string to an mpfr at the given precision."""
    text = s.strip().lower()
    sign = 1
    if text.startswith(("-", "+")):
        if text[0] == "-":
            sign = -1
        text = text[1:]
    if not text.startswith("0x") or "p" not in text:
        raise ValueError(f"malformed hex float: {s!r}")
    mant, _, exp_s = text[2:].partition("p")
    head, _, frac = mant.partition(".")
    try:
        m = int(head + frac, 16) if (head + frac) else _raise(s)
        exp = int(exp_s, 10)
    except ValueError:
        raise ValueError(f"malformed hex float: {s!r}") from None
    e = exp - 4 * len(frac)
    if m == 0:
        with context(precision):
            return mpfr(0)
    # Build the exact value first, then round once at the target precision.
    with context(max(precision, m.bit_length())):
        exact = gmpy2.mul_2exp(mpfr(m), e) if e >= 0 else gmpy2.div_2exp(mpfr(m), -e)
    with context(precision):
        return mpfr(sign * exact)


def _raise(s):
    raise ValueError(f"malformed hex float: {s!r}")


class Pmf:
    """A probability distribution on the residues 0..q-1 of Z_q."""

    __slots__ = ("q", "weights", "backend", "precision")

    def __init__(
        self,
        q: int,
        weights: Sequence,
        backend: str = "float",
        precision: int = DEFAULT_PRECISION,
        normalize: bool = True,
    ) -> None:
        if q < 2:
            raise ValueError(f"q must be >= 2, got {q}")
        if backend not in ("exact", "float"):
            raise ValueError(f"backend must be 'exact' or 'float', got {backend!r}")
        if len(weights) != q:
            raise ValueError(f"expected {q} weights, got {len(weights)}")
        self.q = q
        self.backend = backend
        self.precision = precision
        if backend == "exact":
            ws = [w if isinstance(w, Fraction) else Fraction(w) for w in weights]
            if any(w < 0 for w in ws):
                raise ValueError("negative weight")
            total = sum(ws)
            if total != 1:
                if not normalize:
                    raise ValueError(f"exact weights must sum to 1, got {total}")
                ws = [w / total for w in ws]
            self.weights = tuple(ws)
        else:
            with context(precision):
                ws = [w if isinstance(w, mpfr) else mpfr(w) for w in weights]
                if any(w < 0 for w in ws):
                    raise ValueError("negative weight")
                total = gmpy2.fsum(ws)
                if total <= 0:
                    raise ValueError("weights sum to zero")
                err = abs(total - 1)
                if err > mpfr(2) ** -(precision // 2):
                    raise ValueError(
                        f"weights sum to {total}, outside the 2^-{precision // 2} tolerance"
                    )
                if normalize and total != 1:
                    ws = [w / total for w in ws]
                self.weights = tuple(ws)

    # ----- constructors -------------------------------------------------

    @classmethod
    def delta(cls, q: int, at: int = 0, backend: str = "float",
              precision: int = DEFAULT_PRECISION) -> "Pmf":
        ws = [0] * q
        ws[at % q] = 1
        if backend == "exact":
            return cls(q, [Fraction(w) for w in ws], "exact", precision)
        with context(precision):
            return cls(q, [mpfr(w) for w in ws], "float", precision)

    @classmethod
    def uniform(cls, q: int, backend: str = "float",
                precision: int = DEFAULT_PRECISION) -> "Pmf":
        if backend == "exact":
            return cls(q, [Fraction(1, q)] * q, "exact", precision)
        with context(precision):
            w = 1 / mpfr(q)
            return cls(q, [w] * q, "float", precision)

    @classmethod
    def from_centered(cls, q: int, mapping: Mapping[int, object], backend: str = "float",
                      precision: int = DEFAULT_PRECISION) -> "Pmf":
        """Build from a {centered value: weight} mapping; values are reduced mod q."""
        fr = [Fraction(0)] * q
        for x, w in mapping.items():
            fr[x % q] += Fraction(w) if not isinstance(w, Fraction) else w
        if backend == "exact":
            return cls(q, fr, "exact", precision)
        with context(precision):
            return cls(q, [mpfr(mpq(w.numerator, w.denominator)) for w in fr],
                       "float", precision)

    @classmethod
    def from_fractions(cls, q: int, fractions: Sequence[Fraction], backend: str,
                       precision: int = DEFAULT_PRECISION) -> "Pmf":
        if backend == "exact":
            return cls(q, list(fractions), "exact", precision)
        with context(precision):
            return cls(q, [mpfr(mpq(w.numerator, w.denominator)) for w in fractions],
                       "float", precision)

    # ----- accessors ----------------------------------------------------

    def weight(self, i: int):
        return self.weights[i % self.q]

    def weight_centered(self, x: int):
        return self.weights[x % self.q]

    def centered_items(self) -> Iterator[tuple[int, object]]:
        """Yield (centered value, weight) pairs, centered into [-floor(q/2), ...]."""
        half = self.q // 2
        for i, w in enumerate(self.weights):
            yield (i if i <= half else i - self.q), w

    def support(self) -> list[int]:
        return [i for i, w in enumerate(self.weights) if w != 0]

    def max_abs_support(self) -> int:
        """Largest |x| over the centered support (Lee radius of the support)."""
        return max(abs(x) for x, w in self.centered_items() if w != 0)

    def total(self):
        if self.backend == "exact":
            return sum(self.weights)
        with context(self.precision):
            return gmpy2.fsum(self.weights)

    def mass_within_radius(self, r: int):
        """Total weight on centered values x with |x| <= r."""
        if r < 0:
            raise ValueError("radius must be >= 0")
        if 2 * r + 1 >= self.q:
            return self.total()
        idx = list(range(0, r + 1)) + list(range(self.q - r, self.q))
        if self.backend == "exact":
            return sum(self.weights[i] for i in idx)
        with context(self.precision):
            return gmpy2.fsum(self.weights[i] for i in idx)

    def tail_outside_radius(self, r: int):
        """Total weight on centered values x with |x| > r (directly summed)."""
        if 2 * r + 1 >= self.q:
            return Fraction(0) if self.backend == "exact" else mpfr(0)
        idx = range(r + 1, self.q - r)
        if self.backend == "exact":
            return sum(self.weights[i] for i in idx)
        with context(self.precision):
            return gmpy2.fsum(self.weights[i] for i in idx)

    def mean_centered(self):
        if self.backend == "exact":
            return sum(Fraction(x) * w for x, w in self.centered_items())
        with context(self.precision):
            return gmpy2.fsum(mpfr(x) * w for x, w in self.centered_items())

    def variance_centered(self):
        mu = self.mean_centered()
        if self.backend == "exact":
            return sum(w * (Fraction(x) - mu) ** 2 for x, w in self.centered_items())
        with context(self.precision):
            return gmpy2.fsum(w * (mpfr(x) - mu) ** 2 for x, w in self.centered_items())

    def reflect(self) -> "Pmf":
        """The law of -X mod q."""
        ws = [self.weights[(-i) % self.q] for i in range(self.q)]
        return Pmf(self.q, ws, self.backend, self.precision, normalize=False)

    def as_fractions(self) -> list[Fraction]:
        return [to_fraction(w) for w in self.weights]

    def to_backend(self, backend: str, precision: int | None = None) -> "Pmf":
        prec = self.precision if precision is None else precision
        if backend == self.backend and prec == self.precision:
            return self
        return Pmf.from_fractions(self.q, self.as_fractions(), backend, prec)

    def weights_equal(self, other: "Pmf") -> bool:
        return (
            self.q == other.q
            and self.backend == other.backend
            and all(a == b for a, b in zip(self.weights, other.weights))
        )

    def __repr__(self) -> str:
        return f"Pmf(q={self.q}, backend={self.backend!r}, precision={self.precision})"


def _check_compat(a: Pmf, b: Pmf) -> None:
    if a.q != b.q:
        raise ValueError(f"modulus mismatch: {a.q} != {b.q}")
    if a.backend != b.backend:
        raise ValueError(f"backend mismatch: {a.backend} != {b.backend}")
    if a.backend == "float" and a.precision != b.precision:
        raise ValueError(f"precision mismatch: {a.precision} != {b.precision}")


# ----- exact integer convolution cores ----------------------------------


def _cyclic_convolve_ints_schoolbook(a: Sequence[int], b: Sequence[int], q: int) -> list[int]:
    out = [0] * q
    for i, ai in enumerate(a):
        if not ai:
            continue
        for j, bj in enumerate(b):
            if bj:
                t = i + j
                if t >= q:
                    t -= q
                out[t] += ai * bj
    return out


def _cyclic_convolve_ints_packed(a: Sequence[int], b: Sequence[int], q: int) -> list[int]:
    # Pack both vectors into single big integers with byte-aligned slots wide
    # enough that no slot overflows, multiply once, unpack, and fold the
    # linear result to cyclic.
    abits = max((x.bit_length() for x in a), default=0)
    bbits = max((x.bit_length() for x in b), default=0)
    if abits == 0 or bbits == 0:
        return [0] * q
    slot_bits = abits + bbits + q.bit_length() + 1
    nbytes = (slot_bits + 7) // 8
    pa = b"".join(x.to_bytes(nbytes, "little") for x in a)
    pb = b"".join(x.to_bytes(nbytes, "little") for x in b)
    prod = mpz.from_bytes(pa, "little") * mpz.from_bytes(pb, "little")
    raw = prod.to_bytes(2 * q * nbytes, "little")
    out = []
    for t in range(q):
        lo = int.from_bytes(raw[t * nbytes:(t + 1) * nbytes], "little")
        hi = int.from_bytes(raw[(t + q) * nbytes:(t + q + 1) * nbytes], "little")
        out.append(lo + hi)
    return out


def _cyclic_convolve_ints(a: Sequence[int], b: Sequence[int], q: int) -> list[int]:
    if q <= _PACKED_CUTOFF:
        return _cyclic_convolve_ints_schoolbook(a, b, q)
    return _cyclic_convolve_ints_packed(a, b, q)


def _to_scaled_ints(weights, precision: int) -> tuple[list[int], int]:
    """Represent mpfr weights exactly as m_i * 2^shift with one shared shift."""
    mes: list[tuple[int, int] | None] = []
    emin: int | None = None
    for w in weights:
        if w == 0:
            mes.append(None)
            continue
        m, e = w.as_mantissa_exp()
        m, e = int(m), int(e)
        tz = (m & -m).bit_length() - 1
        m >>= tz
        e += tz
        mes.append((m, e))
        if emin is None or e < emin:
            emin = e
    if emin is None:
        raise ValueError("all-zero weight vector")
    ints = [0 if me is None else me[0] << (me[1] - emin) for me in mes]
    return ints, emin


# ----- public operations -------------------------------------------------


def convolve(a: Pmf, b: Pmf) -> Pmf:
    """Cyclic convolution: the law of X + Y mod q for independent X, Y."""
    _check_compat(a, b)
    q = a.q
    if a.backend == "exact":
        da = math.lcm(*(w.denominator for w in a.weights))
        db = math.lcm(*(w.denominator for w in b.weights))
        na = [w.numerator * (da // w.denominator) for w in a.weights]
        nb = [w.numerator * (db // w.denominator) for w in b.weights]
        nc = _cyclic_convolve_ints(na, nb, q)
        den = da * db
        return Pmf(q, [Fraction(c, den) for c in nc], "exact", a.precision)
    ia, sa = _to_scaled_ints(a.weights, a.precision)
    ib, sb = _to_scaled_ints(b.weights, b.precision)
    ic = _cyclic_convolve_ints(ia, ib, q)
    shift = sa + sb
    with context(a.precision):
        if shift >= 0:
            ws = [gmpy2.mul_2exp(mpfr(c), shift) for c in ic]
        else:
            ws = [gmpy2.div_2exp(mpfr(c), -shift) for c in ic]
        return Pmf(q, ws, "float", a.precision)


def convolve_reference(a: Pmf, b: Pmf) -> Pmf:
    """Schoolbook convolution in the backend arithmetic; oracle for convolve()."""
    _check_compat(a, b)
    q = a.q
    if a.backend == "exact":
        out = [Fraction(0)] * q
        for i, ai in enumerate(a.weights):
            if ai == 0:
                continue
            for j, bj in enumerate(b.weights):
                if bj != 0:
                    out[(i + j) % q] += ai * bj
        return Pmf(q, out, "exact", a.precision)
    with context(a.precision):
        out = [mpfr(0)] * q
        for i, ai in enumerate(a.weights):
            if ai == 0:
                continue
            for j, bj in enumerate(b.weights):
                if bj != 0:
                    t = (i + j) % q
                    out[t] = out[t] + ai * bj
        return Pmf(q, out, "float", a.precision)


def self_convolve(a: Pmf, copies: int) -> Pmf:
    """The law of the sum of `copies` independent draws of a (square-and-multiply)."""
    if copies < 1:
        raise ValueError(f"copies must be >= 1, got {copies}")
    result: Pmf | None = None
    base = a
    m = copies
    while m:
        if m & 1:
            result = base if result is None else convolve(result, base)
        m >>= 1
        if m:
            base = convolve(base, base)
    assert result is not None
    return result


def self_convolve_naive(a: Pmf, copies: int) -> Pmf:
    """Left-fold of convolve; oracle for self_convolve()."""
    if copies < 1:
        raise ValueError(f"copies must be >= 1, got {copies}")
    out = a
    for _ in range(copies - 1):
        out = convolve(out, a)
    return out


def product_pmf(a: Pmf, b: Pmf, support_bound: int = 4096) -> Pmf:
    """The law of X * Y mod q for independent X ~ a, Y ~ b.

    Enumerates support pairs, so at least one operand must have support of
    size <= support_bound.
    """
    _check_compat(a, b)
    q = a.q
    sa, sb = a.support(), b.support()
    if min(len(sa), len(sb)) > support_bound:
        raise ValueError(
            f"both supports exceed the bound {support_bound}: {len(sa)}, {len(sb)}"
        )
    if len(sb) < len(sa):
        a, b, sa, sb = b, a, sb, sa
    if a.backend == "exact":
        out = [Fraction(0)] * q
        for u in sa:
            au = a.weights[u]
            for v in sb:
                out[(u * v) % q] += au * b.weights[v]
        return Pmf(q, out, "exact", a.precision)
    with context(a.precision):
        out = [mpfr(0)] * q
        for u in sa:
            au = a.weights[u]
            for v in sb:
                t = (u * v) % q
                out[t] = out[t] + au * b.weights[v]
        return Pmf(q, out, "float", a.precision)


def shift_mixture(psi: Pmf, Q: int) -> Pmf:
    """Channel output law under uniform constellation input.

    Averages the Q shifted copies of psi placed at the constellation points
    floor(j*q/Q): out(y) = (1/Q) sum_j psi(y - floor(j*q/Q)).
    """
    q = psi.q
    if not 2 <= Q <= q:
        raise ValueError(f"need 2 <= Q <= q, got Q={Q}, q={q}")
    points = [j * q // Q for j in range(Q)]
    if psi.backend == "exact":
        out = [Fraction(0)] * q
        for p in points:
            for i, w in enumerate(psi.weights):
                if w != 0:
                    out[(i + p) % q] += w
        return Pmf(q, [w / Q for w in out], "exact", psi.precision)
    with context(psi.precision):
        out = [mpfr(0)] * q
        for p in points:
            for i, w in enumerate(psi.weights):
                if w != 0:
                    t = (i + p) % q
                    out[t] = out[t] + w
        invq = 1 / mpfr(Q)
        return Pmf(q, [w * invq for w in out], "float", psi.precision)


def entropy(a: Pmf, precision: int | None = None):
    """Shannon entropy in bits, -sum w log2 w with 0 log 0 = 0, as an mpfr."""
    prec = precision if precision is not None else (
        a.precision if a.backend == "float" else DEFAULT_PRECISION
    )
    with context(prec):
        if a.backend == "exact":
            terms = [mpfr(mpq(w.numerator, w.denominator)) for w in a.weights if w != 0]
        else:
            terms = [w for w in a.weights if w != 0]
        return -gmpy2.fsum(w * gmpy2.log2(w) for w in terms)


def total_variation(a: Pmf, b: Pmf):
    _check_compat(a, b)
    if a.backend == "exact":
        return sum(abs(x - y) for x, y in zip(a.weights, b.weights)) / 2
    with context(a.precision):
        return gmpy2.fsum(abs(x - y) for x, y in zip(a.weights, b.weights)) / 2


def max_rel_diff(a: Pmf, b: Pmf, weight_floor: Fraction = Fraction(0)) -> Fraction:
    """Exact maximum relative difference over residues where either weight >= floor.

    Works across backends: every weight is converted to its exact rational
    value first, so the result carries no rounding of its own.
    """
    if a.q != b.q:
        raise ValueError(f"modulus mismatch: {a.q} != {b.q}")
    worst = Fraction(0)
    for x, y in zip(a.as_fractions(), b.as_fractions()):
        ref = max(x, y)
        if ref < weight_floor or ref == 0:
            continue
        worst = max(worst, abs(x - y) / ref)
    return worst


# ----- centered binomial -------------------------------------------------


def pmf_cbd(k: int, q: int, backend: str = "float",
            precision: int = DEFAULT_PRECISION) -> Pmf:
    """Centered binomial law: the difference of two sums of k fair bits.

    Support is [-k, k] with weight C(2k, x+k)/4^k at centered value x;
    mean 0 and variance k/2.
    """
    if k < 1 or k % 2 != 0:
        raise ValueError(f"k must be a positive even integer, got {k}")
    if k >= q:
        raise ValueError(f"k < q violated: k={k}, q={q}")
    den = 4 ** k
    mapping = {x: Fraction(math.comb(2 * k, x + k), den) for x in range(-k, k + 1)}
    return Pmf.from_centered(q, mapping, backend, precision)


# ----- file format -------------------------------------------------------


def write_pmf(pmf: Pmf, path: str | Path) -> None:
    """Write a PMF file: header `q=<q> backend=<b> mantissa=<bits>`, then `index value` lines."""
    lines = [f"q={pmf.q} backend={pmf.backend} mantissa={pmf.precision}"]
    if pmf.backend == "exact":
        lines += [f"{i} {w.numerator}/{w.denominator}" for i, w in enumerate(pmf.weights)]
    else:
        lines += [f"{i} {mpfr_to_hex(w)}" for i, w in enumerate(pmf.weights)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_pmf(path: str | Path) -> Pmf:
    """Read a PMF file written by write_pmf."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = dict(item.split("=", 1) for item in lines[0].split())
    try:
        q = int(header["q"])
        backend = header["backend"]
        precision = int(header["mantissa"])
    except (KeyError, ValueError):
        raise ValueError(f"{path}: malformed header {lines[0]!r}") from None
    if backend not in ("exact", "float"):
        raise ValueError(f"{path}: unknown backend {backend!r}")
    seen: dict[int, object] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        idx_s, _, val_s = line.partition(" ")
        try:
            idx = int(idx_s)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: malformed index {idx_s!r}") from None
        if not 0 <= idx < q or idx in seen:
            raise ValueError(f"{path}:{lineno}: bad or duplicate index {idx}")
        if backend == "exact":
            num, _, den = val_s.partition("/")
            seen[idx] = Fraction(int(num), int(den) if den else 1)
        else:
            seen[idx] = hex_to_mpfr(val_s, precision)
    if len(seen) != q:
        raise ValueError(f"{path}: expected {q} weights, got {len(seen)}")
    weights = [seen[i] for i in range(q)]
    return Pmf(q, weights, backend, precision, normalize=False)


__all__ = [
    "DEFAULT_PRECISION",
    "Pmf",
    "context",
    "convolve",
    "convolve_reference",
    "entropy",
    "hex_to_mpfr",
    "max_rel_diff",
    "mpfr_to_hex",
    "pmf_cbd",
    "product_pmf",
    "read_pmf",
    "self_convolve",
    "self_convolve_naive",
    "shift_mixture",
    "to_fraction",
    "total_variation",
    "write_pmf",
]
