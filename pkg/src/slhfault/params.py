"""SLH-DSA parameter sets and derived WOTS+ lengths."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil

from .errors import NotFound

SHA2 = "SHA2"
SHAKE = "SHAKE"


def derive_wots_lengths(n: int, lg_w: int) -> tuple[int, int]:
    """Return ``(ell1, ell2)`` for an ``n``-byte hash and ``lg_w``-bit digits."""
    if n < 1 or not 1 <= lg_w <= 8:
        raise ValueError(f"unsupported n={n}, lg_w={lg_w}")
    w = 1 << lg_w
    ell1 = ceil(8 * n / lg_w)
    # floor(log_w(max_checksum)) + 1 == number of base-w digits of max_checksum
    max_checksum = ell1 * (w - 1)
    ell2 = 0
    while max_checksum:
        max_checksum //= w
        ell2 += 1
    return ell1, ell2


@dataclass(frozen=True)
class ParameterSet:
    name: str
    n: int
    h: int
    d: int
    h_prime: int
    a: int
    k_fors: int
    lg_w: int
    hash_family: str = SHA2
    w: int = field(init=False)
    ell1: int = field(init=False)
    ell2: int = field(init=False)
    ell: int = field(init=False)
    digest_len: int = field(init=False)

    def __post_init__(self):
        if self.h != self.d * self.h_prime:
            raise ValueError(f"{self.name}: h={self.h} != d*h'={self.d * self.h_prime}")
        if self.hash_family not in (SHA2, SHAKE):
            raise ValueError(f"{self.name}: unknown hash family {self.hash_family!r}")
        ell1, ell2 = derive_wots_lengths(self.n, self.lg_w)
        set_ = object.__setattr__
        set_(self, "w", 1 << self.lg_w)
        set_(self, "ell1", ell1)
        set_(self, "ell2", ell2)
        set_(self, "ell", ell1 + ell2)
        set_(self, "digest_len", self.md_bytes + self.tree_bytes + self.leaf_bytes)

    @property
    def md_bytes(self) -> int:
        return ceil(self.k_fors * self.a / 8)

    @property
    def tree_bits(self) -> int:
        return self.h - self.h_prime

    @property
    def tree_bytes(self) -> int:
        return ceil(self.tree_bits / 8)

    @property
    def leaf_bytes(self) -> int:
        return ceil(self.h_prime / 8)

    @property
    def top_layer(self) -> int:
        return self.d - 1

    @property
    def leaves_per_tree(self) -> int:
        return 1 << self.h_prime

    @property
    def fors_sig_bytes(self) -> int:
        return self.k_fors * (self.a + 1) * self.n

    @property
    def xmss_sig_bytes(self) -> int:
        return (self.ell + self.h_prime) * self.n

    @property
    def sig_bytes(self) -> int:
        return self.n + self.fors_sig_bytes + self.d * self.xmss_sig_bytes

    def seeking_exponent(self, wots_layer: int) -> int:
        """Number of path bits fixed when routing through a subtree below ``wots_layer``."""
        if not 0 <= wots_layer < self.d:
            raise ValueError(f"layer {wots_layer} outside 0..{self.d - 1}")
        return self.h - self.h_prime * wots_layer


# (n, h, d, h', a, k) from the FIPS 205 parameter table; lg_w = 4 throughout.
_STANDARD = {
    "128s": (16, 63, 7, 9, 12, 14),
    "128f": (16, 66, 22, 3, 6, 33),
    "192s": (24, 63, 7, 9, 14, 17),
    "192f": (24, 66, 22, 3, 8, 33),
    "256s": (32, 64, 8, 8, 14, 22),
    "256f": (32, 68, 17, 4, 9, 35),
}

_REGISTRY: dict[str, ParameterSet] = {}


def register(params: ParameterSet) -> ParameterSet:
    _REGISTRY[params.name] = params
    return params


for _family in (SHA2, SHAKE):
    for _suffix, (_n, _h, _d, _hp, _a, _k) in _STANDARD.items():
        register(ParameterSet(f"{_family}-{_suffix}", _n, _h, _d, _hp, _a, _k, 4, _family))

# Test-scale sets. toy-w4 reproduces the w=4, ell1=4, ell2=2 WOTS+ instance;
# toy-e2e is small enough for exhaustive oracles and full forgeries.
register(ParameterSet("toy-w4", n=1, h=4, d=2, h_prime=2, a=2, k_fors=2, lg_w=2))
register(ParameterSet("toy-e2e", n=2, h=6, d=3, h_prime=2, a=2, k_fors=4, lg_w=2))

STANDARD_NAMES = tuple(f"{f}-{s}" for f in (SHA2, SHAKE) for s in _STANDARD)
TOY_NAMES = ("toy-w4", "toy-e2e")


def parameter_set(name: str) -> ParameterSet:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise NotFound(f"unknown parameter set {name!r}") from None


def names() -> list[str]:
    return list(_REGISTRY)
