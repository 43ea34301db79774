"""Q-ary constellation, failure bounds, and capacity lower bounds.

The per-coefficient channel adds psi-distributed noise to one of Q
constellation points in Z_q.  The channel is uniformly dispersive (every
conditional output law is a shift of psi), so H(Y|X) = H(psi) and the
uniform-input mutual information is H(mixture) - H(psi).  Quantizing the
output through the demapper gives a QxQ discrete channel whose uniform-input
mutual information can only be lower.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .params import ParamSet
from .pmf import DEFAULT_PRECISION, Pmf, context, entropy, shift_mixture, to_fraction


@dataclass(frozen=True)
class Constellation:
    """The Q input points x_j = floor(j*q/Q) of Z_q."""

    Q: int
    q: int
    points: tuple[int, ...]

    @classmethod
    def build(cls, Q: int, q: int) -> "Constellation":
        if not 2 <= Q <= q:
            raise ValueError(f"need 2 <= Q <= q, got Q={Q}, q={q}")
        points = tuple(j * q // Q for j in range(Q))
        c = cls(Q=Q, q=q, points=points)
        c._check()
        return c

    def _check(self) -> None:
        pts = self.points
        if list(pts) != sorted(set(pts)) or pts[-1] >= self.q:
            raise ValueError("constellation points must be strictly increasing in [0, q)")
        gap = self.q // self.Q
        for i, x in enumerate(pts):
            nxt = pts[(i + 1) % self.Q]
            lee = min((nxt - x) % self.q, (x - nxt) % self.q)
            if lee < gap:
                raise ValueError(f"adjacent points {x}, {nxt} closer than {gap}")


def lee_distance(a: int, b: int, q: int) -> int:
    d = (a - b) % q
    return min(d, q - d)


def map_symbol(j: int, c: Constellation) -> int:
    if not 0 <= j < c.Q:
        raise ValueError(f"symbol out of range [0, {c.Q}): {j}")
    return c.points[j]


@lru_cache(maxsize=64)
def _demap_table_cached(Q: int, q: int) -> np.ndarray:
    pts = np.array([j * q // Q for j in range(Q)], dtype=np.int64)
    y = np.arange(q, dtype=np.int64)
    diff = (y[None, :] - pts[:, None]) % q
    lee = np.minimum(diff, q - diff)
    # argmin takes the first minimum, which is the smallest symbol index
    table = np.argmin(lee, axis=0).astype(np.int64)
    table.setflags(write=False)
    return table


def demap_table(c: Constellation) -> np.ndarray:
    """Symbol decision for every y in Z_q (read-only, cached)."""
    return _demap_table_cached(c.Q, c.q)


def demap(y: int, c: Constellation) -> int:
    return int(demap_table(c)[y % c.q])


# ----- failure bounds -----------------------------------------------------


def coeff_failure_bound(psi: Pmf, Q: int):
    """Upper bound 1 - sum_{|i| <= floor(q/(2Q))} psi(i) on a demap failure.

    The complement tail is summed directly, so the result keeps full
    precision even when it is astronomically small.
    """
    if not 2 <= Q <= psi.q:
        raise ValueError(f"need 2 <= Q <= q, got Q={Q}, q={psi.q}")
    return psi.tail_outside_radius(psi.q // (2 * Q))


def dfr_bound(pr_e, n: int, t: int, precision: int = DEFAULT_PRECISION):
    """Block failure rate sum_{j=t+1}^n C(n,j) pr_e^j (1-pr_e)^(n-j).

    Exact integer binomials; powers and the sum are evaluated as mpfr with
    an unbounded exponent range, so exponents like 2^-12000 need no special
    handling.  Assumes independent coefficient failures.
    """
    if not 0 <= t <= n:
        raise ValueError(f"need 0 <= t <= n, got t={t}, n={n}")
    terms = _binomial_tail_terms(pr_e, n, precision)
    with context(precision):
        return gmpy2.fsum(terms[t + 1:])


def _binomial_tail_terms(pr_e, n: int, precision: int) -> list:
    if isinstance(pr_e, Fraction):
        pr_e = gmpy2.mpq(pr_e.numerator, pr_e.denominator)
    with context(precision):
        p = mpfr(pr_e)
        if not 0 <= p <= 1:
            raise ValueError(f"pr_e out of [0, 1]: {p}")
        one_m = 1 - p
        terms = []
        for j in range(n + 1):
            terms.append(mpfr(math.comb(n, j)) * p ** j * one_m ** (n - j))
        return terms


def find_min_distance(psi: Pmf, Q: int, n: int, target_dfr_log2: float,
                      precision: int = DEFAULT_PRECISION) -> int:
    """Smallest odd d such that correcting t = (d-1)/2 symbol errors pushes
    the block failure rate below 2^target_dfr_log2."""
    pr_e = coeff_failure_bound(psi, Q)
    terms = _binomial_tail_terms(pr_e, n, precision)
    with context(precision):
        target = mpfr(2) ** mpfr(target_dfr_log2)
        best: int | None = None
        acc = mpfr(0)
        # tail(t) = sum of terms above t; grow it downward from t = n
        if acc < target:
            best = n
        for t in range(n - 1, -1, -1):
            acc += terms[t + 1]
            if acc < target:
                best = t
            else:
                break
    if best is None:
        raise ValueError(f"target 2^{target_dfr_log2} unreachable even with t = n")
    return 2 * best + 1


def log2_float(p) -> float:
    """log2 of a probability (mpfr or Fraction); -inf for zero."""
    if isinstance(p, Fraction):
        if p == 0:
            return float("-inf")
        with context(256):
            return float(gmpy2.log2(mpfr(gmpy2.mpq(p.numerator, p.denominator))))
    if p == 0:
        return float("-inf")
    return float(gmpy2.log2(p))


# ----- capacity bounds ----------------------------------------------------


@dataclass(frozen=True)
class CapacityBound:
    """A mutual-information lower bound, per coefficient and per block of n."""

    coeff_bits: object
    block_bits: object
    n: int

    def __float__(self) -> float:
        return float(self.block_bits)


def capacity_lower_bound(psi: Pmf, Q: int, n: int) -> CapacityBound:
    """n * (H(mixture of the Q shifted psi) - H(psi)), clamped below at 0."""
    mix = shift_mixture(psi, Q)
    prec = psi.precision if psi.backend == "float" else DEFAULT_PRECISION
    with context(prec):
        per = entropy(mix) - entropy(psi)
        if per < 0:
            per = mpfr(0)
        return CapacityBound(coeff_bits=per, block_bits=n * per, n=n)


def transition_matrix(psi: Pmf, Q: int) -> list[list]:
    """Quantized channel matrix: T[j][j'] = Pr(demap(x_j + noise) = j')."""
    q = psi.q
    c = Constellation.build(Q, q)
    table = demap_table(c)
    exact = psi.backend == "exact"
    prec = DEFAULT_PRECISION if exact else psi.precision
    rows: list[list] = []
    with context(prec):
        zero = Fraction(0) if exact else mpfr(0)
        for j in range(Q):
            xj = c.points[j]
            row = [zero] * Q
            for i, w in enumerate(psi.weights):
                if w != 0:
                    row[int(table[(xj + i) % q])] += w
            rows.append(row)
    return rows


def _mutual_information_uniform(rows: list[list], precision: int):
    Q = len(rows)
    with context(precision):
        frows = [[mpfr(gmpy2.mpq(w.numerator, w.denominator)) if isinstance(w, Fraction)
                  else w for w in row] for row in rows]
        py = [gmpy2.fsum(frows[j][y] for j in range(Q)) / Q for y in range(Q)]
        total = mpfr(0)
        for row in frows:
            for y, w in enumerate(row):
                if w > 0:
                    total += w * gmpy2.log2(w / py[y])
        return total / Q


def quantized_capacity_lower_bound(psi: Pmf, Q: int, n: int) -> CapacityBound:
    """Uniform-input mutual information of the demapped QxQ channel, times n."""
    rows = transition_matrix(psi, Q)
    prec = psi.precision if psi.backend == "float" else DEFAULT_PRECISION
    with context(prec):
        per = _mutual_information_uniform(rows, prec)
        if per < 0:
            per = mpfr(0)
        return CapacityBound(coeff_bits=per, block_bits=n * per, n=n)


# ----- input optimization -------------------------------------------------


@dataclass(frozen=True)
class OptimizeResult:
    input_dist: tuple[float, ...]
    mutual_information: float
    uniform_mutual_information: float
    iterations_used: int
    converged: bool


def optimize_input(psi: Pmf, Q: int, iterations: int = 200,
                   tolerance: float = 1e-9) -> OptimizeResult:
    """Alternating maximization of I(X;Y) over the input distribution.

    Works on the full q-output component channel in double precision
    (weights below the double range contribute nothing at the tolerances of
    interest).  Starts from the uniform input, so the result is never more
    than `tolerance` below the uniform-input mutual information.
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    q = psi.q
    c = Constellation.build(Q, q)
    w = np.array([float(x) for x in psi.weights], dtype=np.float64)
    T = np.stack([np.roll(w, p) for p in c.points])  # (Q, q)
    mask = T > 0.0
    logT = np.zeros_like(T)
    logT[mask] = np.log(T[mask])

    px = np.full(Q, 1.0 / Q)
    best_i = -np.inf
    best_px = px.copy()
    uniform_mi = float("nan")
    converged = False
    used = iterations
    for it in range(1, iterations + 1):
        py = px @ T
        # D_j = sum_y T[j,y] log(T[j,y]/py[y]) for the current input
        with np.errstate(divide="ignore"):
            logpy = np.where(py > 0.0, np.log(py), 0.0)
        d = np.einsum("jy,jy->j", T, np.where(mask, logT - logpy[None, :], 0.0))
        il = float(px @ d)
        iu = float(np.max(d))
        if it == 1:
            uniform_mi = il / math.log(2.0)
        if il > best_i:
            best_i = il
            best_px = px.copy()
        if iu - il < tolerance * math.log(2.0):
            converged = True
            used = it
            break
        px = px * np.exp(d - np.max(d))
        px /= px.sum()
    return OptimizeResult(
        input_dist=tuple(float(x) for x in best_px),
        mutual_information=best_i / math.log(2.0),
        uniform_mutual_information=uniform_mi,
        iterations_used=used,
        converged=converged,
    )


# ----- combined report ----------------------------------------------------


def plaintext_per_ciphertext(rate_bits_per_coeff, param: ParamSet) -> Fraction:
    """Plaintext bits per ciphertext bit: R / (l * d_u_eff + d_v)."""
    r = rate_bits_per_coeff if isinstance(rate_bits_per_coeff, Fraction) \
        else to_fraction_like(rate_bits_per_coeff)
    if r < 0:
        raise ValueError(f"rate must be >= 0, got {r}")
    den = param.l * param.d_u_eff + param.d_v
    if den == 0:
        raise ValueError("zero ciphertext cost")
    return r / den


def to_fraction_like(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, float)):
        return Fraction(x)
    return to_fraction(x)


@dataclass(frozen=True)
class ChannelReport:
    param: ParamSet
    Q: int
    pr_e_bound_log2: float
    cap_lb_full: CapacityBound
    cap_lb_quant: CapacityBound
    bits_per_coeff: float
    plain_per_cipher: float


def build_channel_report(psi: Pmf, param: ParamSet, Q: int) -> ChannelReport:
    pr_e = coeff_failure_bound(psi, Q)
    full = capacity_lower_bound(psi, Q, param.n)
    quant = quantized_capacity_lower_bound(psi, Q, param.n)
    bpc = float(full.coeff_bits)
    if not 0 <= bpc <= math.log2(Q) + 1e-12:
        raise AssertionError(f"bits per coefficient {bpc} outside [0, log2 {Q}]")
    if float(quant.block_bits) > float(full.block_bits) * (1 + 1e-12):
        raise AssertionError("quantized bound exceeds full bound")
    ppc = float(plaintext_per_ciphertext(Fraction(bpc), param))
    return ChannelReport(
        param=param,
        Q=Q,
        pr_e_bound_log2=log2_float(pr_e),
        cap_lb_full=full,
        cap_lb_quant=quant,
        bits_per_coeff=bpc,
        plain_per_cipher=ppc,
    )


__all__ = [
    "CapacityBound",
    "ChannelReport",
    "Constellation",
    "OptimizeResult",
    "build_channel_report",
    "capacity_lower_bound",
    "coeff_failure_bound",
    "demap",
    "demap_table",
    "dfr_bound",
    "find_min_distance",
    "lee_distance",
    "log2_float",
    "map_symbol",
    "optimize_input",
    "plaintext_per_ciphertext",
    "quantized_capacity_lower_bound",
    "transition_matrix",
]
