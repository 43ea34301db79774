"""Scheme parameter sets, Q-ary channel configuration, and precision configuration.

A :class:`ParamSet` is the tuple (n, q, k, l, d_u, d_v) that fixes the ring
Z_q[x]/(x^n + 1), the centered binomial noise parameter k, the module rank l
(l = 1 is the plain ring case), and the ciphertext compression bit counts.
Parameter sets can be built in, or loaded from simple key/value text files.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path


@dataclass(frozen=True)
class ParamSet:
    """Validated scheme parameters.

    Attributes:
        name: identifier string.
        n: ring degree, a power of two, n >= 2.
        q: coefficient modulus, q >= 3.
        k: centered binomial parameter, positive even integer.
        l: module rank, positive integer; l = 1 means the plain ring case.
        d_u: compression bits for the u ciphertext component; 0 means
            "u is not compressed".
        d_v: compression bits for the v ciphertext component, d_v >= 1.
    """

    name: str
    n: int
    q: int
    k: int
    l: int
    d_u: int
    d_v: int

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise ValueError("name must be a nonempty string")
        for f in ("n", "q", "k", "l", "d_u", "d_v"):
            v = getattr(self, f)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValueError(f"{f} must be an integer, got {v!r}")
        if self.n < 2 or self.n & (self.n - 1) != 0:
            raise ValueError(f"n must be a power of two >= 2, got {self.n}")
        if self.q < 3:
            raise ValueError(f"q must be >= 3, got {self.q}")
        if self.k < 1 or self.k % 2 != 0:
            raise ValueError(f"k must be a positive even integer, got {self.k}")
        if self.k >= self.q:
            raise ValueError(f"k < q violated: k={self.k}, q={self.q}")
        if self.l < 1:
            raise ValueError(f"l must be >= 1, got {self.l}")
        if self.d_u < 0:
            raise ValueError(f"d_u must be >= 0, got {self.d_u}")
        if self.d_v < 1:
            raise ValueError(f"d_v must be >= 1, got {self.d_v}")
        if self.d_u > 0 and 2 ** self.d_u >= self.q:
            raise ValueError(f"2^d_u < q violated: d_u={self.d_u}, q={self.q}")
        if 2 ** self.d_v >= self.q:
            raise ValueError(f"2^d_v < q violated: d_v={self.d_v}, q={self.q}")

    @property
    def is_rlwe(self) -> bool:
        """True when the parameters describe the plain ring case (l = 1, u uncompressed)."""
        return self.l == 1 and self.d_u == 0

    @property
    def d_u_eff(self) -> int:
        """Ciphertext bits spent per u coefficient: d_u, or ceil(log2 q) when u is raw."""
        if self.d_u > 0:
            return self.d_u
        return (self.q - 1).bit_length()


@dataclass(frozen=True)
class QaryConfig:
    """Input alphabet configuration for the Q-ary channel."""

    Q: int
    q: int

    def __post_init__(self) -> None:
        if self.Q < 2:
            raise ValueError(f"Q must be >= 2, got {self.Q}")
        if self.Q > self.q:
            raise ValueError(f"Q <= q violated: Q={self.Q}, q={self.q}")


@dataclass(frozen=True)
class PrecisionConfig:
    """Numeric backend selection.

    mantissa_bits is the working precision of the extended-precision float
    backend; exact_mode selects exact rational arithmetic instead (practical
    only for small moduli, q <= 512 or so).
    """

    mantissa_bits: int = 1024
    exact_mode: bool = False

    def __post_init__(self) -> None:
        if self.mantissa_bits < 64:
            raise ValueError(f"mantissa_bits must be >= 64, got {self.mantissa_bits}")

    @property
    def backend(self) -> str:
        return "exact" if self.exact_mode else "float"


PARAM_SETS: dict[str, ParamSet] = {
    p.name: p
    for p in (
        ParamSet("newhope1024", n=1024, q=12289, k=8, l=1, d_u=0, d_v=3),
        ParamSet("kyber1024", n=256, q=3329, k=2, l=4, d_u=11, d_v=5),
        # Toy sets sized so the simulator sees failures at Monte Carlo scale.
        ParamSet("toy_n2q17", n=2, q=17, k=2, l=1, d_u=0, d_v=2),
        ParamSet("toy_n2q17_mlwe", n=2, q=17, k=2, l=2, d_u=2, d_v=2),
        ParamSet("toy_n4q17", n=4, q=17, k=2, l=1, d_u=0, d_v=2),
        ParamSet("toy_n4q97", n=4, q=97, k=2, l=1, d_u=2, d_v=3),
        ParamSet("toy_n8q97_mlwe", n=8, q=97, k=2, l=2, d_u=3, d_v=3),
        ParamSet("toy_n8q257", n=8, q=257, k=2, l=1, d_u=0, d_v=3),
        ParamSet("toy_n16q257_mlwe", n=16, q=257, k=2, l=2, d_u=3, d_v=3),
    )
}

_INT_KEYS = ("n", "q", "k", "l", "d_u", "d_v")


def builtin(name: str) -> ParamSet:
    """Return a built-in parameter set by name."""
    try:
        return PARAM_SETS[name]
    except KeyError:
        known = ", ".join(sorted(PARAM_SETS))
        raise KeyError(f"unknown preset {name!r}; known presets: {known}") from None


def load_param_set(path: str | Path) -> ParamSet:
    """Load a ParamSet from a key/value text file.

    The format is one ``key = value`` pair per line with keys
    name, n, q, k, l, d_u, d_v; blank lines and ``#`` comments are ignored.
    Unknown keys are rejected.
    """
    text = Path(path).read_text(encoding="utf-8")
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key in values:
            raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
        if key == "name":
            values[key] = val
        elif key in _INT_KEYS:
            try:
                values[key] = int(val, 10)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: {key} must be a decimal integer, got {val!r}") from None
        else:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    missing = [k for k in ("name", *_INT_KEYS) if k not in values]
    if missing:
        raise ValueError(f"{path}: missing keys: {', '.join(missing)}")
    return ParamSet(**values)  # type: ignore[arg-type]


def save_param_set(param: ParamSet, path: str | Path) -> None:
    """Write a ParamSet in the load_param_set file format."""
    lines = [f"name = {param.name}"]
    lines += [f"{key} = {getattr(param, key)}" for key in _INT_KEYS]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def resolve_param_set(scheme: str | Path) -> ParamSet:
    """Resolve a scheme argument: a built-in preset name or a parameter file path."""
    if isinstance(scheme, str) and scheme in PARAM_SETS:
        return PARAM_SETS[scheme]
    p = Path(scheme)
    if p.exists():
        return load_param_set(p)
    raise KeyError(f"unknown preset or missing file: {scheme!r}")


__all__ = [
    "ParamSet",
    "QaryConfig",
    "PrecisionConfig",
    "PARAM_SETS",
    "builtin",
    "load_param_set",
    "save_param_set",
    "resolve_param_set",
]
