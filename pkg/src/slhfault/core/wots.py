"""WOTS+ chains, digit encoding, signing and public-key recovery."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import RangeError
from ..params import ParameterSet
from .adrs import WOTS_HASH, WOTS_PK, WOTS_PRF, Adrs
from .hashing import prf, primitive, thash


@dataclass(frozen=True)
class WotsSignature:
    nodes: tuple[bytes, ...]

    def __bytes__(self):
        return b"".join(self.nodes)


def base_w(value: bytes, out_len: int, lg_w: int) -> list[int]:
    """Split ``value`` into ``out_len`` big-endian ``lg_w``-bit digits."""
    total_bits = 8 * len(value)
    if out_len * lg_w > total_bits:
        raise RangeError(f"{len(value)} bytes hold fewer than {out_len} digits of {lg_w} bits")
    x = int.from_bytes(value, "big")
    mask = (1 << lg_w) - 1
    shift = total_bits - lg_w
    digits = []
    for _ in range(out_len):
        digits.append((x >> shift) & mask)
        shift -= lg_w
    return digits


def digits_value(digits, w: int) -> int:
    """Integer value of big-endian base-``w`` digits."""
    v = 0
    for d in digits:
        v = v * w + d
    return v


def wots_checksum(msg_digits, w: int, ell2: int) -> list[int]:
    """Checksum sum(w-1-m_i) as ``ell2`` base-w digits, most significant first."""
    csum = sum(w - 1 - m for m in msg_digits)
    out = []
    for _ in range(ell2):
        csum, r = divmod(csum, w)
        out.append(r)
    return out[::-1]


def wots_digits(params: ParameterSet, value: bytes) -> list[int]:
    """Chain positions signed for ``value``: message digits then checksum digits."""
    msg = base_w(value, params.ell1, params.lg_w)
    return msg + wots_checksum(msg, params.w, params.ell2)


def chain(params: ParameterSet, x: bytes, start: int, steps: int, pk_seed: bytes, adrs: Adrs) -> bytes:
    """Advance ``x`` from chain position ``start`` by ``steps`` hash applications.

    ``adrs`` must already carry the chain index; its hash field is overwritten
    per step (only its first 28 bytes are read).
    """
    if start < 0 or steps < 0 or start + steps > params.w - 1:
        raise RangeError(f"chain({start}, {steps}) exceeds w-1={params.w - 1}")
    if steps == 0:
        return x
    f = primitive(params)
    prefix = pk_seed + bytes(adrs.a[:28])
    for j in range(start, start + steps):
        x = f(prefix + j.to_bytes(4, "big") + x)
    return x


def _chain_adrs(adrs: Adrs) -> Adrs:
    out = Adrs.at(adrs.layer, adrs.tree)
    out.set_type_and_clear(WOTS_HASH)
    out.set_keypair(adrs.keypair)
    return out


def _secret_adrs(adrs: Adrs) -> Adrs:
    out = Adrs.at(adrs.layer, adrs.tree)
    out.set_type_and_clear(WOTS_PRF)
    out.set_keypair(adrs.keypair)
    return out


def _compress(params: ParameterSet, pk_seed: bytes, adrs: Adrs, endpoints) -> bytes:
    pk_adrs = Adrs.at(adrs.layer, adrs.tree)
    pk_adrs.set_type_and_clear(WOTS_PK)
    pk_adrs.set_keypair(adrs.keypair)
    return thash(params, pk_seed, pk_adrs, b"".join(endpoints))


def wots_secret(params: ParameterSet, sk_seed: bytes, pk_seed: bytes, adrs: Adrs, i: int) -> bytes:
    """Starting value of chain ``i``."""
    sk_adrs = _secret_adrs(adrs)
    sk_adrs.set_chain(i)
    return prf(params, pk_seed, sk_seed, sk_adrs)


def wots_pkgen(params: ParameterSet, sk_seed: bytes, pk_seed: bytes, adrs: Adrs) -> bytes:
    sk_adrs = _secret_adrs(adrs)
    ch_adrs = _chain_adrs(adrs)
    ends = []
    for i in range(params.ell):
        sk_adrs.set_chain(i)
        ch_adrs.set_chain(i)
        sk = prf(params, pk_seed, sk_seed, sk_adrs)
        ends.append(chain(params, sk, 0, params.w - 1, pk_seed, ch_adrs))
    return _compress(params, pk_seed, adrs, ends)


def wots_sign(params: ParameterSet, value: bytes, sk_seed: bytes, pk_seed: bytes, adrs: Adrs) -> WotsSignature:
    if len(value) != params.n:
        raise RangeError(f"value must be {params.n} bytes")
    sk_adrs = _secret_adrs(adrs)
    ch_adrs = _chain_adrs(adrs)
    nodes = []
    for i, d in enumerate(wots_digits(params, value)):
        sk_adrs.set_chain(i)
        ch_adrs.set_chain(i)
        sk = prf(params, pk_seed, sk_seed, sk_adrs)
        nodes.append(chain(params, sk, 0, d, pk_seed, ch_adrs))
    return WotsSignature(tuple(nodes))


def wots_endpoints(params: ParameterSet, sig: WotsSignature, digits, pk_seed: bytes, adrs: Adrs) -> list[bytes]:
    """Chain endpoints implied by ``sig`` when node i sits at position ``digits[i]``."""
    ch_adrs = _chain_adrs(adrs)
    ends = []
    for i, (node, d) in enumerate(zip(sig.nodes, digits)):
        ch_adrs.set_chain(i)
        ends.append(chain(params, node, d, params.w - 1 - d, pk_seed, ch_adrs))
    return ends


def wots_compress(params: ParameterSet, endpoints, pk_seed: bytes, adrs: Adrs) -> bytes:
    """Compressed WOTS+ public key from the ``ell`` chain endpoints."""
    return _compress(params, pk_seed, adrs, endpoints)


def wots_pk_from_sig(params: ParameterSet, sig: WotsSignature, value: bytes, pk_seed: bytes, adrs: Adrs) -> bytes:
    if len(value) != params.n:
        raise RangeError(f"value must be {params.n} bytes")
    ends = wots_endpoints(params, sig, wots_digits(params, value), pk_seed, adrs)
    return _compress(params, pk_seed, adrs, ends)
