"""Noise-channel model of RLWE/MLWE public-key encryption.

Exact per-coefficient noise laws, decryption-failure bounds, capacity lower
bounds for Q-ary coefficient alphabets, matching code-parameter searches, and
a Monte Carlo encrypt/decrypt validator.
"""

from __future__ import annotations

from .channel import (
    CapacityBound,
    ChannelReport,
    Constellation,
    OptimizeResult,
    build_channel_report,
    capacity_lower_bound,
    coeff_failure_bound,
    demap,
    demap_table,
    dfr_bound,
    find_min_distance,
    lee_distance,
    log2_float,
    map_symbol,
    optimize_input,
    plaintext_per_ciphertext,
    quantized_capacity_lower_bound,
    transition_matrix,
)
from .codes import (
    BchResult,
    CodeSearchResult,
    bch_best_dimension,
    bch_search,
    char_of_prime_power,
    cyclotomic_cosets,
    gv_max_dimension,
    largest_d_for_rate,
    maximize_rate_for_dfr,
    minimize_dfr_for_rate,
)
from .compression import (
    compress,
    compression_noise_pmf,
    decompress,
    preimage_partition,
    round_half_up_div,
)
from .noise import (
    LogProb,
    NoiseModel,
    build_noise_model,
    build_psi_mlwe,
    build_psi_rlwe,
    independence_bound_mlwe,
    independence_bound_rlwe,
    zero_poly_event_prob,
)
from .params import (
    PARAM_SETS,
    ParamSet,
    PrecisionConfig,
    QaryConfig,
    builtin,
    load_param_set,
    resolve_param_set,
    save_param_set,
)
from .pmf import (
    Pmf,
    convolve,
    entropy,
    max_rel_diff,
    pmf_cbd,
    product_pmf,
    read_pmf,
    self_convolve,
    shift_mixture,
    total_variation,
    write_pmf,
)
from .ring import (
    RingElement,
    RingVector,
    center,
    make_rng,
    ring_add,
    ring_dot,
    ring_mul,
    ring_sub,
    sample_cbd,
    sample_cbd_vector,
    sample_uniform,
    sample_uniform_matrix,
)
from .simulate import (
    Ciphertext,
    EncryptDebug,
    FailureStats,
    KeyPair,
    SymbolMessage,
    TrialBatch,
    collect_noise_histogram,
    decrypt,
    decrypt_raw,
    draw_trial_batch,
    encrypt,
    encrypt_with,
    keygen,
    keygen_with,
    map_message,
    measure_coeff_failures,
    noise_residual,
    predicted_noise,
    random_message,
    run_trial_batch,
)

__version__ = "0.1.0"

__all__ = [
    "BchResult",
    "CapacityBound",
    "ChannelReport",
    "Ciphertext",
    "CodeSearchResult",
    "Constellation",
    "EncryptDebug",
    "FailureStats",
    "KeyPair",
    "LogProb",
    "NoiseModel",
    "OptimizeResult",
    "PARAM_SETS",
    "ParamSet",
    "Pmf",
    "PrecisionConfig",
    "QaryConfig",
    "RingElement",
    "RingVector",
    "SymbolMessage",
    "TrialBatch",
    "bch_best_dimension",
    "bch_search",
    "build_channel_report",
    "build_noise_model",
    "build_psi_mlwe",
    "build_psi_rlwe",
    "builtin",
    "capacity_lower_bound",
    "center",
    "char_of_prime_power",
    "coeff_failure_bound",
    "collect_noise_histogram",
    "compress",
    "compression_noise_pmf",
    "convolve",
    "cyclotomic_cosets",
    "decompress",
    "decrypt",
    "decrypt_raw",
    "demap",
    "demap_table",
    "dfr_bound",
    "draw_trial_batch",
    "encrypt",
    "encrypt_with",
    "entropy",
    "find_min_distance",
    "gv_max_dimension",
    "independence_bound_mlwe",
    "independence_bound_rlwe",
    "keygen",
    "keygen_with",
    "largest_d_for_rate",
    "lee_distance",
    "load_param_set",
    "log2_float",
    "make_rng",
    "map_message",
    "map_symbol",
    "max_rel_diff",
    "maximize_rate_for_dfr",
    "measure_coeff_failures",
    "minimize_dfr_for_rate",
    "noise_residual",
    "optimize_input",
    "plaintext_per_ciphertext",
    "pmf_cbd",
    "predicted_noise",
    "preimage_partition",
    "product_pmf",
    "quantized_capacity_lower_bound",
    "random_message",
    "read_pmf",
    "resolve_param_set",
    "ring_add",
    "ring_dot",
    "ring_mul",
    "ring_sub",
    "round_half_up_div",
    "run_trial_batch",
    "sample_cbd",
    "sample_cbd_vector",
    "sample_uniform",
    "sample_uniform_matrix",
    "save_param_set",
    "self_convolve",
    "shift_mixture",
    "total_variation",
    "transition_matrix",
    "write_pmf",
    "zero_poly_event_prob",
]
