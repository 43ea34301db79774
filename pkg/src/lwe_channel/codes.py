"""Gilbert-Varshamov feasibility and BCH parameter search over GF(Q).

The BCH dimension for designed distance d at length n_bch is
n_bch - |union of the cyclotomic cosets meeting a window of d-1 consecutive
root exponents|.  The search slides the window start b over all residues
(not just the narrow-sense b = 1) and keeps the best dimension; rows where
a non-narrow-sense window wins are flagged rather than hidden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .channel import coeff_failure_bound, dfr_bound, find_min_distance, log2_float
from .noise import build_noise_model
from .params import ParamSet, PrecisionConfig
from .pmf import DEFAULT_PRECISION, Pmf


def char_of_prime_power(Q: int) -> int:
    """The characteristic p of GF(Q); errors unless Q = p^m for a prime p."""
    if Q < 2:
        raise ValueError(f"Q must be >= 2, got {Q}")
    p = None
    for cand in range(2, Q + 1):
        if Q % cand == 0:
            p = cand
            break
    assert p is not None
    m = Q
    while m % p == 0:
        m //= p
    if m != 1:
        raise ValueError(f"Q = {Q} is not a prime power")
    return p


def gv_max_dimension(n: int, d: int, Q: int) -> int:
    """Largest k whose existence the Gilbert-Varshamov ball bound guarantees.

    Exact big-integer arithmetic; k = n - min{e >= 0 : Q^e >= V} where V is
    the volume of the radius-(d-2) ball in Hamming space over Q symbols.
    Boundary convention: equality Q^(n-k) = V still counts as satisfying the
    bound (this matters only when V is an exact power of Q).
    """
    if not 1 <= d <= n:
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
    if Q < 2:
        raise ValueError(f"Q must be >= 2, got {Q}")
    volume = sum(math.comb(n - 1, i) * (Q - 1) ** i for i in range(d - 1))
    e = 0
    power = 1
    while power < volume:
        power *= Q
        e += 1
    k = n - e
    if k < 1:
        raise ValueError(f"no positive dimension satisfies the bound for n={n}, d={d}, Q={Q}")
    return k


def cyclotomic_cosets(n: int, Q: int) -> list[list[int]]:
    """Cosets of multiplication by Q on Z_n, each sorted, ordered by minimum."""
    if math.gcd(n, Q) != 1:
        raise ValueError(f"need gcd(n, Q) = 1, got n={n}, Q={Q}")
    seen = [False] * n
    out = []
    for i in range(n):
        if seen[i]:
            continue
        coset = []
        j = i
        while not seen[j]:
            seen[j] = True
            coset.append(j)
            j = (j * Q) % n
        out.append(sorted(coset))
    return out


def _coset_labels(n: int, Q: int) -> tuple[list[int], list[int]]:
    """label[i] = representative of i's coset; size[rep] = coset size."""
    label = [-1] * n
    size = [0] * n
    for i in range(n):
        if label[i] != -1:
            continue
        members = []
        j = i
        while label[j] == -1:
            label[j] = i
            members.append(j)
            j = (j * Q) % n
        size[i] = len(members)
    return label, size


def bch_best_dimension(n_bch: int, d: int, Q: int) -> tuple[int, int]:
    """Best dimension over every window start b; returns (k, b).

    Requires gcd(n_bch, char(GF(Q))) = 1 so that x^n_bch - 1 is squarefree.
    The roots alpha^b .. alpha^(b+d-2) force out the union of their cosets;
    a sliding refcount window evaluates all n_bch starts in O(n_bch).
    """
    p = char_of_prime_power(Q)
    if n_bch % p == 0:
        raise ValueError(f"length {n_bch} shares a factor with the characteristic {p}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    w = d - 1
    if w == 0:
        return n_bch, 0
    if w >= n_bch:
        raise ValueError(f"designed distance {d} exceeds length {n_bch}")
    label, size = _coset_labels(n_bch, Q)
    ref = [0] * n_bch
    union = 0
    for e in range(w):
        lab = label[e]
        if ref[lab] == 0:
            union += size[lab]
        ref[lab] += 1
    best_union, best_b = union, 0
    for b in range(1, n_bch):
        lab = label[b - 1]
        ref[lab] -= 1
        if ref[lab] == 0:
            union -= size[lab]
        lab = label[(b + w - 1) % n_bch]
        if ref[lab] == 0:
            union += size[lab]
        ref[lab] += 1
        if union < best_union:
            best_union, best_b = union, b
    return n_bch - best_union, best_b


@dataclass(frozen=True)
class BchResult:
    n_bch: int
    k_bch: int
    b: int

    @property
    def narrow_sense(self) -> bool:
        return self.b == 1


def bch_search(n_max: int, d_required: int, Q: int,
               min_dimension: int = 1) -> BchResult:
    """Best (largest-k) BCH parameters over admissible lengths <= n_max.

    Lengths run downward so that equal dimensions keep the largest length.
    min_dimension prunes the scan and turns `nothing reaches it` into an
    error.
    """
    if d_required < 1:
        raise ValueError(f"d_required must be >= 1, got {d_required}")
    p = char_of_prime_power(Q)
    best: BchResult | None = None
    floor_len = max(2, min_dimension + d_required - 1)
    for n_bch in range(n_max, floor_len - 1, -1):
        if n_bch % p == 0:
            continue
        # union of the window cosets has at least d-1 elements
        if best is not None and n_bch - (d_required - 1) <= best.k_bch:
            break
        if d_required - 1 >= n_bch:
            continue
        k, b = bch_best_dimension(n_bch, d_required, Q)
        if k >= max(1, min_dimension) and (best is None or k > best.k_bch):
            best = BchResult(n_bch=n_bch, k_bch=k, b=b)
    if best is None:
        raise ValueError(
            f"no BCH code of length <= {n_max} over GF({Q}) reaches "
            f"dimension {min_dimension} at designed distance {d_required}"
        )
    return best


# ----- optimization drivers -----------------------------------------------


@dataclass(frozen=True)
class CodeSearchResult:
    """One table row: required distance plus GV and BCH parameters.

    BCH fields are None when d = 1 (no code needed).  k_gv fields are None
    for rows produced by the fixed-rate driver, which searches BCH codes
    only.
    """

    Q: int
    d: int
    dfr_log2: float
    k_gv: int | None = None
    r_gv: float | None = None
    n_bch: int | None = None
    k_bch: int | None = None
    r_bch: float | None = None
    b: int | None = None
    plain_per_cipher: float | None = None

    @property
    def narrow_sense(self) -> bool | None:
        return None if self.b is None else self.b == 1


def _rate_bits_per_coeff(k: int, n: int, Q: int) -> float:
    return k * math.log2(Q) / n


def _plain_per_cipher(rate: float, param: ParamSet) -> float:
    return rate / (param.l * param.d_u_eff + param.d_v)


def maximize_rate_for_dfr(param: ParamSet, Q_list: list[int], target_dfr_log2: float,
                          precision: PrecisionConfig | None = None) -> list[CodeSearchResult]:
    """For each Q: required d for the target DFR, then GV and BCH parameters."""
    model = build_noise_model(param, precision)
    psi = model.psi
    n = param.n
    prec = psi.precision if psi.backend == "float" else DEFAULT_PRECISION
    rows = []
    for Q in Q_list:
        d = find_min_distance(psi, Q, n, target_dfr_log2, prec)
        pr_e = coeff_failure_bound(psi, Q)
        t = (d - 1) // 2
        dfr = dfr_bound(pr_e, n, t, prec)
        k_gv = gv_max_dimension(n, d, Q)
        r_gv = _rate_bits_per_coeff(k_gv, n, Q)
        if d == 1:
            rows.append(CodeSearchResult(
                Q=Q, d=d, dfr_log2=log2_float(dfr), k_gv=k_gv, r_gv=r_gv,
                plain_per_cipher=_plain_per_cipher(r_gv, param),
            ))
            continue
        bch = bch_search(n, d, Q)
        r_bch = _rate_bits_per_coeff(bch.k_bch, n, Q)
        rows.append(CodeSearchResult(
            Q=Q, d=d, dfr_log2=log2_float(dfr), k_gv=k_gv, r_gv=r_gv,
            n_bch=bch.n_bch, k_bch=bch.k_bch, r_bch=r_bch, b=bch.b,
            plain_per_cipher=_plain_per_cipher(r_bch, param),
        ))
    return rows


def largest_d_for_rate(n: int, Q: int, min_rate_bits_per_coeff: float) -> tuple[int, BchResult | None]:
    """Largest designed distance still compatible with the rate floor.

    Rate floor k_min = ceil(min_rate * n / log2 Q).  d = 1 is served by the
    trivial full-rate length-n code, so a BCH length constraint never rules
    it out.  Feasibility is monotone in d (growing the root window only
    shrinks every dimension), so a binary search applies.
    """
    k_min = math.ceil(min_rate_bits_per_coeff * n / math.log2(Q) - 1e-12)
    if k_min > n:
        raise ValueError(
            f"rate {min_rate_bits_per_coeff} needs dimension {k_min} > n = {n}"
        )

    def feasible(d: int) -> BchResult | None:
        try:
            return bch_search(n, d, Q, min_dimension=k_min)
        except ValueError:
            return None

    best_code = feasible(2)
    if best_code is None:
        return 1, None
    lo, hi = 2, n + 1  # feasible(lo) holds; hi is infeasible
    best_at_lo = best_code
    while hi - lo > 1:
        mid = (lo + hi) // 2
        got = feasible(mid)
        if got is not None:
            lo, best_at_lo = mid, got
        else:
            hi = mid
    return lo, best_at_lo


def minimize_dfr_for_rate(param: ParamSet, Q_list: list[int], min_rate_bits_per_coeff: float,
                          precision: PrecisionConfig | None = None) -> list[CodeSearchResult]:
    """For each Q: the largest d meeting the rate floor, and its DFR bound."""
    model = build_noise_model(param, precision)
    psi = model.psi
    n = param.n
    prec = psi.precision if psi.backend == "float" else DEFAULT_PRECISION
    rows = []
    for Q in Q_list:
        d, code = largest_d_for_rate(n, Q, min_rate_bits_per_coeff)
        pr_e = coeff_failure_bound(psi, Q)
        dfr = dfr_bound(pr_e, n, (d - 1) // 2, prec)
        if code is None:
            rows.append(CodeSearchResult(Q=Q, d=d, dfr_log2=log2_float(dfr)))
        else:
            r_bch = _rate_bits_per_coeff(code.k_bch, n, Q)
            rows.append(CodeSearchResult(
                Q=Q, d=d, dfr_log2=log2_float(dfr),
                n_bch=code.n_bch, k_bch=code.k_bch, r_bch=r_bch, b=code.b,
                plain_per_cipher=_plain_per_cipher(r_bch, param),
            ))
    return rows


__all__ = [
    "BchResult",
    "CodeSearchResult",
    "bch_best_dimension",
    "bch_search",
    "char_of_prime_power",
    "cyclotomic_cosets",
    "gv_max_dimension",
    "largest_d_for_rate",
    "maximize_rate_for_dfr",
    "minimize_dfr_for_rate",
]
