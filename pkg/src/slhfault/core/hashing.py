"""Tweakable hash, PRFs and message hash.

Both families use the plain prefix construction ``pk_seed || ADRS || input``.
SHA2 sets truncate SHA-256 to n bytes, SHAKE sets read n bytes of SHAKE256.
"""

from __future__ import annotations

import hashlib
import hmac
from functools import lru_cache

from ..params import SHA2, ParameterSet


@lru_cache(maxsize=None)
def _primitive(family: str, n: int):
    if family == SHA2:
        sha256 = hashlib.sha256

        def f(data: bytes) -> bytes:
            return sha256(data).digest()[:n]

    else:
        shake = hashlib.shake_256

        def f(data: bytes) -> bytes:
            return shake(data).digest(n)

    return f


def primitive(params: ParameterSet):
    """Return the raw ``bytes -> n bytes`` function for ``params``."""
    return _primitive(params.hash_family, params.n)


def thash(params: ParameterSet, pk_seed: bytes, adrs, data: bytes) -> bytes:
    return _primitive(params.hash_family, params.n)(pk_seed + bytes(adrs) + data)


def prf(params: ParameterSet, pk_seed: bytes, sk_seed: bytes, adrs) -> bytes:
    """Secret chain / FORS leaf derivation (address must carry a PRF type)."""
    return thash(params, pk_seed, adrs, sk_seed)


def prf_msg(params: ParameterSet, sk_prf: bytes, opt_rand: bytes, message: bytes) -> bytes:
    if params.hash_family == SHA2:
        return hmac.new(sk_prf, opt_rand + message, hashlib.sha256).digest()[: params.n]
    return hashlib.shake_256(sk_prf + opt_rand + message).digest(params.n)


def _mgf1_sha256(seed: bytes, length: int) -> bytes:
    out = bytearray()
    counter = 0
    while len(out) < length:
        out += hashlib.sha256(seed + counter.to_bytes(4, "big")).digest()
        counter += 1
    return bytes(out[:length])


def h_msg(params: ParameterSet, r: bytes, pk_seed: bytes, pk_root: bytes, message: bytes) -> bytes:
    """Message digest of ``digest_len`` bytes."""
    data = r + pk_seed + pk_root + message
    if params.hash_family == SHA2:
        return _mgf1_sha256(hashlib.sha256(data).digest(), params.digest_len)
    return hashlib.shake_256(data).digest(params.digest_len)
