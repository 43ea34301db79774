"""Per-coefficient decryption-noise law for RLWE and MLWE encryption.

One coefficient of the decryption noise decomposes, under the standard
independence heuristic, into a sum of l*n products of fresh-noise
coefficients from each of the two inner products, plus the masking noise
e'' and the reconstruction error of the compressed ciphertext parts.  All
differences are folded into sums (the product of a symmetric centered
binomial with anything independent is symmetric); the small rounding
asymmetry of the compression laws is kept as-is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from .compression import compression_noise_pmf
from .params import ParamSet, PrecisionConfig
from .pmf import (
    DEFAULT_PRECISION,
    Pmf,
    context,
    convolve,
    pmf_cbd,
    product_pmf,
    self_convolve,
)


@dataclass(frozen=True)
class NoiseModel:
    """The assembled noise law and its components.

    xi: law of the product of two independent centered binomial draws.
    rho_u / rho_v: reconstruction-error laws of the compressed ciphertext
    parts (rho_u is the point mass at 0 when d_u = 0).
    eta: law of one coefficient of the secret-times-decompressed-ciphertext
    inner product, i.e. the l*n-fold sum of chi * (chi + rho_u) products.
    psi: the full per-coefficient noise law.
    """

    param: ParamSet
    xi: Pmf
    rho_u: Pmf
    rho_v: Pmf
    eta: Pmf
    psi: Pmf


@dataclass(frozen=True)
class LogProb:
    """A probability reported on log scales (values may underflow floats)."""

    log2: float

    @property
    def log10(self) -> float:
        return self.log2 * math.log10(2.0)

    def __str__(self) -> str:
        return f"2^{self.log2:.2f} = 10^{self.log10:.2f}"


_MODEL_CACHE: dict[tuple, NoiseModel] = {}


def _build(param: ParamSet, backend: str, precision: int) -> NoiseModel:
    q = param.q
    chi = pmf_cbd(param.k, q, backend, precision)
    rho_u = compression_noise_pmf(param.d_u, q, backend, precision)
    rho_v = compression_noise_pmf(param.d_v, q, backend, precision)
    xi = product_pmf(chi, chi)
    zeta = product_pmf(chi, convolve(chi, rho_u))
    terms = param.l * param.n
    xi_sum = self_convolve(xi, terms)
    # With d_u = 0 the two inner-product chains are identical; reuse the
    # convolution power instead of recomputing it.
    eta = xi_sum if zeta.weights_equal(xi) else self_convolve(zeta, terms)
    psi = convolve(convolve(convolve(xi_sum, eta), chi), rho_v)
    return NoiseModel(param=param, xi=xi, rho_u=rho_u, rho_v=rho_v, eta=eta, psi=psi)


def build_psi_mlwe(param: ParamSet, backend: str = "float",
                   precision: int = DEFAULT_PRECISION) -> NoiseModel:
    """Noise law for the module scheme: psi = (l*n-fold xi) * eta * chi * rho_v."""
    key = (param.n, param.q, param.k, param.l, param.d_u, param.d_v, backend, precision)
    model = _MODEL_CACHE.get(key)
    if model is None:
        model = _build(param, backend, precision)
        _MODEL_CACHE[key] = model
    return model


def build_psi_rlwe(param: ParamSet, backend: str = "float",
                   precision: int = DEFAULT_PRECISION) -> NoiseModel:
    """Noise law for the ring scheme (uncompressed u): requires l=1 and d_u=0.

    Identical construction to the module path with zeta = xi, so the output
    is bitwise-equal to build_psi_mlwe on the same parameters.
    """
    if not param.is_rlwe:
        raise ValueError(
            f"ring construction requires l=1 and d_u=0, got l={param.l}, d_u={param.d_u}"
        )
    return build_psi_mlwe(param, backend, precision)


def build_noise_model(param: ParamSet, precision: PrecisionConfig | None = None) -> NoiseModel:
    """Build with a PrecisionConfig, dispatching on the ring/module shape."""
    cfg = precision if precision is not None else PrecisionConfig()
    if param.is_rlwe:
        return build_psi_rlwe(param, cfg.backend, cfg.mantissa_bits)
    return build_psi_mlwe(param, cfg.backend, cfg.mantissa_bits)


# ----- independence-assumption guard probabilities -----------------------


def _cbd_zero_weight(k: int):
    # chi_k(0) = C(2k, k) / 4^k
    return gmpy2.mpq(math.comb(2 * k, k), 4 ** k)


def _union_zero_bound_log2(k: int, n: int, polys: int) -> float:
    with context(256):
        return float(gmpy2.log2(mpfr(polys)) + n * gmpy2.log2(mpfr(_cbd_zero_weight(k))))


def zero_poly_event_prob(param: ParamSet, polys: int) -> LogProb:
    """Union bound polys * chi_k(0)^n on some noise polynomial being zero."""
    if polys < 1:
        raise ValueError(f"polys must be >= 1, got {polys}")
    return LogProb(log2=_union_zero_bound_log2(param.k, param.n, polys))


def _rlwe_independence_log2(q: int, n: int) -> float:
    return float(n * (1.0 - math.log2(q)))


def independence_bound_rlwe(param: ParamSet) -> LogProb:
    """Bound (2/q)^n on the ring-case independence condition failing."""
    if param.l != 1:
        raise ValueError(f"ring bound requires l=1, got l={param.l}")
    return LogProb(log2=_rlwe_independence_log2(param.q, param.n))


def _mlwe_independence_log2(q: int, n: int) -> float:
    return float(n / 2 + 1 - n * math.log2(q))


def independence_bound_mlwe(param: ParamSet) -> LogProb:
    """Bound 2^(n/2+1) / q^n on the module-case independence condition failing."""
    if param.n % 2 != 0:
        raise ValueError(f"module bound requires even n, got n={param.n}")
    return LogProb(log2=_mlwe_independence_log2(param.q, param.n))


__all__ = [
    "LogProb",
    "NoiseModel",
    "build_noise_model",
    "build_psi_mlwe",
    "build_psi_rlwe",
    "independence_bound_mlwe",
    "independence_bound_rlwe",
    "zero_poly_event_prob",
]
