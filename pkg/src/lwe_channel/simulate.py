"""Executable model of the public-key scheme with Q-ary map/demap.

Two engines share one randomness layout:

  * an object API over RingElements (keygen / encrypt / decrypt) with
    injected-randomness constructors and debug transcripts, used to verify
    the decryption-noise identity algebraically, and
  * a vectorized batch engine for Monte Carlo runs, whose per-trial inputs
    can be fed through the object API for bit-identical cross-validation.

Batch draw order (one Generator call per line, int64, C-order):
    A      ~ integers(0, q, (B, l, l, n))
    s, e   ~ integers(0, 2, (B, l, n, 2k)) each, folded by cbd_from_bits
    s',e'  ~ integers(0, 2, (B, l, n, 2k)) each
    e''    ~ integers(0, 2, (B, n, 2k))
    msg    ~ integers(0, Q, (B, n))

No error-correcting code runs here: the simulator measures the raw symbol
channel; code effects are composed analytically elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import Constellation, demap_table
from .compression import compress, decompress
from .params import ParamSet
from .ring import (
    RingElement,
    RingVector,
    Seed,
    cbd_from_bits,
    make_rng,
    ring_add,
    ring_mul,
    ring_sub,
)

# ----- object API ----------------------------------------------------------


@dataclass(frozen=True)
class KeyPair:
    """Public (A, b) and secret s; e is kept for noise tracing."""

    A: tuple[tuple[RingElement, ...], ...]
    b: RingVector
    s: RingVector
    e: RingVector


@dataclass(frozen=True)
class Ciphertext:
    """Compressed ciphertext; u_comp holds raw residues when d_u = 0."""

    u_comp: tuple[tuple[int, ...], ...]
    v_comp: tuple[int, ...]
    param: ParamSet
    compressed: bool

    def __post_init__(self) -> None:
        p = self.param
        if len(self.u_comp) != p.l or any(len(row) != p.n for row in self.u_comp):
            raise ValueError("u has the wrong shape")
        if len(self.v_comp) != p.n:
            raise ValueError("v has the wrong length")
        if self.compressed:
            u_hi = p.q if p.d_u == 0 else 1 << p.d_u
            v_hi = 1 << p.d_v
            if any(not 0 <= c < u_hi for row in self.u_comp for c in row):
                raise ValueError("u entry out of range")
            if any(not 0 <= c < v_hi for c in self.v_comp):
                raise ValueError("v entry out of range")


@dataclass(frozen=True)
class SymbolMessage:
    symbols: tuple[int, ...]
    Q: int

    def __post_init__(self) -> None:
        if self.Q < 2:
            raise ValueError(f"Q must be >= 2, got {self.Q}")
        if any(not 0 <= s < self.Q for s in self.symbols):
            raise ValueError("symbol out of range")


@dataclass(frozen=True)
class EncryptDebug:
    """Transient encryption values retained for noise tracing."""

    s_prime: RingVector
    e_prime: RingVector
    e_dprime: RingElement
    u: RingVector
    v: RingElement


def random_message(param: ParamSet, Q: int, seed: Seed) -> SymbolMessage:
    rng = make_rng(seed)
    vals = rng.integers(0, Q, size=param.n, dtype=np.int64)
    return SymbolMessage(tuple(int(v) for v in vals), Q)


def _matvec(A, vec: RingVector, transpose: bool = False) -> list[RingElement]:
    l = len(vec.elems)
    out = []
    for i in range(l):
        acc = None
        for j in range(l):
            a_ij = A[j][i] if transpose else A[i][j]
            term = ring_mul(a_ij, vec.elems[j])
            acc = term if acc is None else ring_add(acc, term)
        out.append(acc)
    return out


def keygen_with(param: ParamSet, A, s: RingVector, e: RingVector) -> KeyPair:
    """Deterministic keygen from explicit randomness: b = A s + e."""
    As = _matvec(A, s)
    b = RingVector(tuple(ring_add(x, y) for x, y in zip(As, e.elems)))
    return KeyPair(A=A, b=b, s=s, e=e)


def keygen(param: ParamSet, seed: Seed) -> KeyPair:
    rng = make_rng(seed)
    from .ring import sample_cbd_vector, sample_uniform_matrix

    A = sample_uniform_matrix(param, rng)
    s = sample_cbd_vector(param, rng)
    e = sample_cbd_vector(param, rng)
    return keygen_with(param, A, s, e)


def map_message(msg: SymbolMessage, param: ParamSet) -> RingElement:
    """Coefficientwise constellation map of the symbols into R_q."""
    c = Constellation.build(msg.Q, param.q)
    return RingElement(tuple(c.points[s] for s in msg.symbols), param)


def encrypt_with(kp: KeyPair, msg: SymbolMessage, param: ParamSet,
                 s_prime: RingVector, e_prime: RingVector, e_dprime: RingElement,
                 use_compression: bool = True) -> tuple[Ciphertext, EncryptDebug]:
    """Encryption from explicit randomness; returns the debug transcript.

    u = A^T s' + e';  v = b^T s' + e'' + Map(msg);  then d_u/d_v compression
    (the u step vacuous when d_u = 0).  use_compression=False is a test hook
    that transmits u, v verbatim.
    """
    if len(msg.symbols) != param.n:
        raise ValueError(f"message length {len(msg.symbols)} != n = {param.n}")
    ats = _matvec(kp.A, s_prime, transpose=True)
    u = RingVector(tuple(ring_add(x, y) for x, y in zip(ats, e_prime.elems)))
    bs = None
    for bi, si in zip(kp.b.elems, s_prime.elems):
        term = ring_mul(bi, si)
        bs = term if bs is None else ring_add(bs, term)
    v = ring_add(ring_add(bs, e_dprime), map_message(msg, param))
    if not use_compression:
        u_comp = tuple(poly.coeffs for poly in u.elems)
        v_comp = v.coeffs
    else:
        q, d_u, d_v = param.q, param.d_u, param.d_v
        if d_u == 0:
            u_comp = tuple(poly.coeffs for poly in u.elems)
        else:
            u_comp = tuple(tuple(compress(c, d_u, q) for c in poly.coeffs)
                           for poly in u.elems)
        v_comp = tuple(compress(c, d_v, q) for c in v.coeffs)
    ct = Ciphertext(u_comp=u_comp, v_comp=v_comp, param=param,
                    compressed=use_compression)
    return ct, EncryptDebug(s_prime=s_prime, e_prime=e_prime, e_dprime=e_dprime,
                            u=u, v=v)


def encrypt(kp: KeyPair, msg: SymbolMessage, param: ParamSet, seed: Seed,
            use_compression: bool = True) -> tuple[Ciphertext, EncryptDebug]:
    rng = make_rng(seed)
    from .ring import sample_cbd, sample_cbd_vector

    s_prime = sample_cbd_vector(param, rng)
    e_prime = sample_cbd_vector(param, rng)
    e_dprime = sample_cbd(param, rng)
    return encrypt_with(kp, msg, param, s_prime, e_prime, e_dprime, use_compression)


def _decompress_ct(ct: Ciphertext) -> tuple[RingVector, RingElement]:
    p = ct.param
    q, d_u, d_v = p.q, p.d_u, p.d_v
    if not ct.compressed:
        u2 = RingVector(tuple(RingElement(row, p) for row in ct.u_comp))
        v2 = RingElement(ct.v_comp, p)
        return u2, v2
    if d_u == 0:
        u2 = RingVector(tuple(RingElement(row, p) for row in ct.u_comp))
    else:
        u2 = RingVector(tuple(
            RingElement(tuple(decompress(c, d_u, q) for c in row), p)
            for row in ct.u_comp))
    v2 = RingElement(tuple(decompress(c, d_v, q) for c in ct.v_comp), p)
    return u2, v2


def decrypt_raw(ct: Ciphertext, sk: RingVector, param: ParamSet) -> RingElement:
    """The pre-demap polynomial w = v'' - s^T u''."""
    u2, v2 = _decompress_ct(ct)
    su = None
    for si, ui in zip(sk.elems, u2.elems):
        term = ring_mul(si, ui)
        su = term if su is None else ring_add(su, term)
    return ring_sub(v2, su)


def decrypt(ct: Ciphertext, sk: RingVector, param: ParamSet, Q: int) -> SymbolMessage:
    w = decrypt_raw(ct, sk, param)
    table = demap_table(Constellation.build(Q, param.q))
    return SymbolMessage(tuple(int(table[c]) for c in w.coeffs), Q)


def noise_residual(ct: Ciphertext, sk: RingVector, msg: SymbolMessage,
                   param: ParamSet) -> RingElement:
    """(v'' - s^T u'') - Map(msg), the realized per-coefficient noise."""
    return ring_sub(decrypt_raw(ct, sk, param), map_message(msg, param))


def predicted_noise(kp: KeyPair, ct: Ciphertext, dbg: EncryptDebug,
                    param: ParamSet) -> RingElement:
    """e^T s' + e'' - s^T (e' + c_Nu) + c_Nv from the retained transcripts.

    c_Nu and c_Nv are the reconstruction errors of the two compressions;
    equals noise_residual exactly on every trial.
    """
    u2, v2 = _decompress_ct(ct)
    c_nu = RingVector(tuple(ring_sub(x, y) for x, y in zip(u2.elems, dbg.u.elems)))
    c_nv = ring_sub(v2, dbg.v)
    es = None
    for ei, si in zip(kp.e.elems, dbg.s_prime.elems):
        term = ring_mul(ei, si)
        es = term if es is None else ring_add(es, term)
    s_term = None
    for si, xi in zip(kp.s.elems, (ring_add(a, b) for a, b in
                                   zip(dbg.e_prime.elems, c_nu.elems))):
        term = ring_mul(si, xi)
        s_term = term if s_term is None else ring_add(s_term, term)
    return ring_add(ring_sub(ring_add(es, dbg.e_dprime), s_term), c_nv)


# ----- vectorized batch engine ---------------------------------------------


@dataclass(frozen=True)
class TrialBatch:
    """Per-trial randomness for a batch, in the documented draw order."""

    A: np.ndarray        # (B, l, l, n) residues
    s: np.ndarray        # (B, l, n) centered CBD values
    e: np.ndarray
    s_prime: np.ndarray
    e_prime: np.ndarray
    e_dprime: np.ndarray  # (B, n)
    msg: np.ndarray       # (B, n) symbols

    @property
    def batch(self) -> int:
        return self.A.shape[0]


def draw_trial_batch(param: ParamSet, Q: int, batch: int, rng: np.random.Generator) -> TrialBatch:
    n, q, k, l = param.n, param.q, param.k, param.l
    A = rng.integers(0, q, size=(batch, l, l, n), dtype=np.int64)
    s = cbd_from_bits(rng.integers(0, 2, size=(batch, l, n, 2 * k), dtype=np.int64), k)
    e = cbd_from_bits(rng.integers(0, 2, size=(batch, l, n, 2 * k), dtype=np.int64), k)
    sp = cbd_from_bits(rng.integers(0, 2, size=(batch, l, n, 2 * k), dtype=np.int64), k)
    ep = cbd_from_bits(rng.integers(0, 2, size=(batch, l, n, 2 * k), dtype=np.int64), k)
    edp = cbd_from_bits(rng.integers(0, 2, size=(batch, n, 2 * k), dtype=np.int64), k)
    msg = rng.integers(0, Q, size=(batch, n), dtype=np.int64)
    return TrialBatch(A=A, s=s, e=e, s_prime=sp, e_prime=ep, e_dprime=edp, msg=msg)


def _poly_mul_batch(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """Negacyclic product of (B, n) coefficient arrays, reduced mod q."""
    B, n = a.shape
    out = np.zeros((B, n), dtype=np.int64)
    for i in range(n):
        rolled = np.roll(b, i, axis=1)
        if i:
            rolled[:, :i] = -rolled[:, :i]
        out += a[:, i:i + 1] * rolled
    return out % q


def _round_half_up_div_arr(num: np.ndarray, den: int) -> np.ndarray:
    return (2 * num + den) // (2 * den)


def _compress_arr(z: np.ndarray, d: int, q: int) -> np.ndarray:
    return _round_half_up_div_arr(z << d, q) % (1 << d)


def _decompress_arr(z: np.ndarray, d: int, q: int) -> np.ndarray:
    return _round_half_up_div_arr(z * q, 1 << d)


@dataclass(frozen=True)
class BatchResult:
    decoded: np.ndarray    # (B, n) symbols
    failures: np.ndarray   # (B, n) bool
    residual: np.ndarray   # (B, n) residues of (w - Map(msg)) mod q


def run_trial_batch(param: ParamSet, Q: int, tb: TrialBatch,
                    use_compression: bool = True) -> BatchResult:
    n, q, l = param.n, param.q, param.l
    B = tb.batch
    c = Constellation.build(Q, q)
    points = np.array(c.points, dtype=np.int64)
    table = demap_table(c)

    b_vec = np.zeros((B, l, n), dtype=np.int64)
    u = np.zeros((B, l, n), dtype=np.int64)
    for i in range(l):
        for j in range(l):
            b_vec[:, i] += _poly_mul_batch(tb.A[:, i, j], tb.s[:, j] % q, q)
            u[:, j] += _poly_mul_batch(tb.A[:, i, j], tb.s_prime[:, i] % q, q)
    b_vec = (b_vec + tb.e) % q
    u = (u + tb.e_prime) % q

    v = np.zeros((B, n), dtype=np.int64)
    for i in range(l):
        v += _poly_mul_batch(b_vec[:, i], tb.s_prime[:, i] % q, q)
    v = (v + tb.e_dprime + points[tb.msg]) % q

    if use_compression:
        if param.d_u > 0:
            u = _decompress_arr(_compress_arr(u, param.d_u, q), param.d_u, q)
        v = _decompress_arr(_compress_arr(v, param.d_v, q), param.d_v, q)

    su = np.zeros((B, n), dtype=np.int64)
    for i in range(l):
        su += _poly_mul_batch(tb.s[:, i] % q, u[:, i], q)
    w = (v - su) % q

    decoded = table[w]
    residual = (w - points[tb.msg]) % q
    return BatchResult(decoded=decoded, failures=decoded != tb.msg, residual=residual)


# ----- Monte Carlo drivers --------------------------------------------------


@dataclass
class FailureStats:
    """Per-coefficient failure counts plus pairwise dependence diagnostics."""

    param: ParamSet
    Q: int
    trials: int
    coeff_errors: np.ndarray    # (n,)
    pair_joint: np.ndarray      # (n, n) joint error counts, symmetric
    workers: int

    @property
    def total_errors(self) -> int:
        return int(self.coeff_errors.sum())

    @property
    def empirical_pr_e(self) -> float:
        return self.total_errors / (self.trials * self.param.n)

    def coeff_rates(self) -> np.ndarray:
        return self.coeff_errors / self.trials

    def pairwise_dependence(self, min_joint: int = 1) -> list[dict]:
        """Joint vs product-of-marginals rows with a 3-sigma half width.

        Reported, not judged: coefficient failures are only approximately
        independent.
        """
        n = self.param.n
        t = self.trials
        rates = self.coeff_rates()
        rows = []
        for i in range(n):
            for j in range(i + 1, n):
                joint = int(self.pair_joint[i, j])
                if joint < min_joint:
                    continue
                p_joint = joint / t
                p_prod = float(rates[i] * rates[j])
                sigma = (p_joint * (1 - p_joint) / t) ** 0.5
                rows.append({
                    "i": i, "j": j, "joint_freq": p_joint, "product_freq": p_prod,
                    "three_sigma": 3 * sigma,
                })
        return rows

    def to_csv(self, path: str | Path) -> None:
        lines = ["coefficient,errors,trials"]
        lines += [f"{i},{int(c)},{self.trials}" for i, c in enumerate(self.coeff_errors)]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _worker_counts(trials: int, workers: int) -> list[int]:
    base, extra = divmod(trials, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def measure_coeff_failures(param: ParamSet, Q: int, trials: int, seed: Seed,
                           workers: int = 1, batch_size: int = 4096,
                           use_compression: bool = True) -> FailureStats:
    """Fresh keygen/encrypt/decrypt trials; counts symbol errors per position.

    Trials split across `workers` blocks with independently derived seeds
    (deterministic for fixed seed and worker count); aggregation is a sum,
    so it is order-independent.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    n = param.n
    root = np.random.SeedSequence(_seed_entropy(seed))
    children = root.spawn(workers)
    coeff = np.zeros(n, dtype=np.int64)
    joint = np.zeros((n, n), dtype=np.int64)
    for w, count in enumerate(_worker_counts(trials, workers)):
        rng = np.random.default_rng(children[w])
        left = count
        while left > 0:
            b = min(batch_size, left)
            tb = draw_trial_batch(param, Q, b, rng)
            res = run_trial_batch(param, Q, tb, use_compression)
            coeff += res.failures.sum(axis=0)
            multi = np.nonzero(res.failures.sum(axis=1) >= 2)[0]
            for t in multi:
                idx = np.nonzero(res.failures[t])[0]
                joint[np.ix_(idx, idx)] += 1
            left -= b
    np.fill_diagonal(joint, 0)
    return FailureStats(param=param, Q=Q, trials=trials, coeff_errors=coeff,
                        pair_joint=joint, workers=workers)


def collect_noise_histogram(param: ParamSet, Q: int, trials: int, seed: Seed,
                            workers: int = 1, batch_size: int = 4096,
                            use_compression: bool = True) -> np.ndarray:
    """Histogram over Z_q of the realized noise, all coefficients pooled."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    root = np.random.SeedSequence(_seed_entropy(seed))
    children = root.spawn(workers)
    counts = np.zeros(param.q, dtype=np.int64)
    for w, count in enumerate(_worker_counts(trials, workers)):
        rng = np.random.default_rng(children[w])
        left = count
        while left > 0:
            b = min(batch_size, left)
            tb = draw_trial_batch(param, Q, b, rng)
            res = run_trial_batch(param, Q, tb, use_compression)
            counts += np.bincount(res.residual.ravel(), minlength=param.q)
            left -= b
    return counts


def _seed_entropy(seed: Seed) -> int:
    if isinstance(seed, np.random.Generator):
        raise TypeError("Monte Carlo drivers need a reproducible seed, not a Generator")
    if isinstance(seed, (bytes, bytearray)):
        return int.from_bytes(bytes(seed), "big")
    if isinstance(seed, int) and seed >= 0:
        return seed
    raise TypeError(f"seed must be bytes or a nonnegative int: {seed!r}")


__all__ = [
    "BatchResult",
    "Ciphertext",
    "EncryptDebug",
    "FailureStats",
    "KeyPair",
    "SymbolMessage",
    "TrialBatch",
    "collect_noise_histogram",
    "decrypt",
    "decrypt_raw",
    "draw_trial_batch",
    "encrypt",
    "encrypt_with",
    "keygen",
    "keygen_with",
    "map_message",
    "measure_coeff_failures",
    "noise_residual",
    "predicted_noise",
    "random_message",
]
