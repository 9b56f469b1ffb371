"""SLH-DSA key generation, signing and verification."""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from typing import Mapping, Optional

from ..errors import FormatError
from ..params import ParameterSet
from .adrs import Adrs
from .fors import ForsSignature, fors_adrs, fors_pk_from_sig, fors_sign
from .hashing import h_msg, prf_msg
from .wots import WotsSignature, base_w
from .xmss import LnodeHook, XmssSignature, _sign_with_nodes, tree_nodes, xmss_node, xmss_pk_from_sig

DETERMINISTIC = "det"
RANDOMIZED = "rand"
MODES = (DETERMINISTIC, RANDOMIZED)


@dataclass(frozen=True)
class KeyPair:
    sk_seed: bytes
    sk_prf: bytes
    pk_seed: bytes
    pk_root: bytes


@dataclass(frozen=True)
class SlhSignature:
    randomizer: bytes
    fors_sig: ForsSignature
    ht_sigs: tuple[XmssSignature, ...]  # layer 0 (bottom) first


@dataclass(frozen=True)
class DigestSplit:
    fors_indices: tuple[int, ...]
    tree_index: int
    leaf_index: int

    def path(self, params: ParameterSet) -> list[tuple[int, int]]:
        return layer_path(params, self.tree_index, self.leaf_index)

    def full_index(self, params: ParameterSet) -> int:
        """The h-bit concatenation of tree and leaf index."""
        return (self.tree_index << params.h_prime) | self.leaf_index


def layer_path(params: ParameterSet, tree_index: int, leaf_index: int) -> list[tuple[int, int]]:
    """``(tree, leaf)`` visited at each layer, bottom layer first."""
    path = [(tree_index, leaf_index)]
    mask = params.leaves_per_tree - 1
    for _ in range(1, params.d):
        leaf_index = tree_index & mask
        tree_index >>= params.h_prime
        path.append((tree_index, leaf_index))
    return path


def digest_split(params: ParameterSet, r: bytes, pk_seed: bytes, pk_root: bytes, message: bytes) -> DigestSplit:
    digest = h_msg(params, r, pk_seed, pk_root, message)
    md = digest[: params.md_bytes]
    tree_part = digest[params.md_bytes : params.md_bytes + params.tree_bytes]
    leaf_part = digest[params.md_bytes + params.tree_bytes : params.digest_len]
    tree = int.from_bytes(tree_part, "big") % (1 << params.tree_bits)
    leaf = int.from_bytes(leaf_part, "big") % (1 << params.h_prime)
    return DigestSplit(tuple(base_w(md, params.k_fors, params.a)), tree, leaf)


def keypair_from_seeds(params: ParameterSet, sk_seed: bytes, sk_prf: bytes, pk_seed: bytes) -> KeyPair:
    root = xmss_node(params, sk_seed, 0, params.h_prime, pk_seed, Adrs.at(params.d - 1, 0))
    return KeyPair(sk_seed, sk_prf, pk_seed, root)


def slh_keygen(params: ParameterSet, seed: Optional[bytes] = None) -> KeyPair:
    """Key pair derived deterministically from ``seed`` (fresh entropy if omitted)."""
    if seed is None:
        seed = os.urandom(3 * params.n)
    material = hashlib.shake_256(b"slhfault-keygen" + seed).digest(3 * params.n)
    n = params.n
    return keypair_from_seeds(params, material[:n], material[n : 2 * n], material[2 * n :])


def randomizer(params: ParameterSet, message: bytes, keypair: KeyPair, mode: str, opt_rand: Optional[bytes] = None) -> bytes:
    """R for ``message``; deterministic signing uses pk_seed as the extra randomness."""
    if mode == DETERMINISTIC:
        opt_rand = keypair.pk_seed
    elif mode == RANDOMIZED:
        if opt_rand is None:
            opt_rand = os.urandom(params.n)
    else:
        raise ValueError(f"unknown signing mode {mode!r}")
    return prf_msg(params, keypair.sk_prf, opt_rand, message)


def slh_sign(
    params: ParameterSet,
    message: bytes,
    keypair: KeyPair,
    mode: str = DETERMINISTIC,
    opt_rand: Optional[bytes] = None,
    *,
    root_hooks: Optional[Mapping[int, LnodeHook]] = None,
) -> SlhSignature:
    """Sign ``message``.

    ``root_hooks`` maps a layer to an lnode hook; the root handed up from
    that layer is then recomputed through the hook.  The auth paths in the
    signature always come from the untouched tree.
    """
    r = randomizer(params, message, keypair, mode, opt_rand)
    split = digest_split(params, r, keypair.pk_seed, keypair.pk_root, message)
    path = split.path(params)
    tree0, leaf0 = path[0]
    f_adrs = fors_adrs(tree0, leaf0)
    fors_sig = fors_sign(params, split.fors_indices, keypair.sk_seed, keypair.pk_seed, f_adrs)
    value = fors_pk_from_sig(params, fors_sig, split.fors_indices, keypair.pk_seed, f_adrs)

    layers = []
    for layer, (tree, leaf) in enumerate(path):
        adrs = Adrs.at(layer, tree)
        nodes = tree_nodes(params, keypair.sk_seed, keypair.pk_seed, adrs)
        layers.append(_sign_with_nodes(params, value, keypair.sk_seed, keypair.pk_seed, leaf, adrs, nodes))
        hook = root_hooks.get(layer) if root_hooks else None
        if hook is None:
            value = nodes[(params.h_prime, 0)]
        else:
            value = xmss_node(params, keypair.sk_seed, 0, params.h_prime, keypair.pk_seed, adrs, lnode_hook=hook)
    return SlhSignature(r, fors_sig, tuple(layers))


def check_shape(params: ParameterSet, sig: SlhSignature):
    """Raise FormatError unless every field of ``sig`` has its fixed length."""
    n = params.n
    if len(sig.randomizer) != n:
        raise FormatError("randomizer length")
    if len(sig.fors_sig.trees) != params.k_fors:
        raise FormatError("FORS tree count")
    for sk, auth in sig.fors_sig.trees:
        if len(sk) != n or len(auth) != params.a or any(len(x) != n for x in auth):
            raise FormatError("FORS tree shape")
    if len(sig.ht_sigs) != params.d:
        raise FormatError(f"expected {params.d} layers, got {len(sig.ht_sigs)}")
    for layer in sig.ht_sigs:
        nodes, auth = layer.wots_sig.nodes, layer.auth_path
        if len(nodes) != params.ell or len(auth) != params.h_prime:
            raise FormatError("XMSS layer shape")
        if any(len(x) != n for x in nodes) or any(len(x) != n for x in auth):
            raise FormatError("node length")


def slh_verify(params: ParameterSet, message: bytes, sig, pk_seed: bytes, pk_root: bytes) -> bool:
    try:
        if isinstance(sig, (bytes, bytearray)):
            sig = decode_signature(params, bytes(sig))
        check_shape(params, sig)
    except FormatError:
        return False
    split = digest_split(params, sig.randomizer, pk_seed, pk_root, message)
    path = split.path(params)
    tree0, leaf0 = path[0]
    value = fors_pk_from_sig(params, sig.fors_sig, split.fors_indices, pk_seed, fors_adrs(tree0, leaf0))
    for layer, ((tree, leaf), xsig) in enumerate(zip(path, sig.ht_sigs)):
        value = xmss_pk_from_sig(params, xsig, value, leaf, pk_seed, Adrs.at(layer, tree))
    return value == pk_root


def encode_signature(params: ParameterSet, sig: SlhSignature) -> bytes:
    check_shape(params, sig)
    return sig.randomizer + bytes(sig.fors_sig) + b"".join(bytes(x) for x in sig.ht_sigs)


def decode_signature(params: ParameterSet, data: bytes) -> SlhSignature:
    if len(data) != params.sig_bytes:
        raise FormatError(f"signature is {len(data)} bytes, expected {params.sig_bytes}")
    n = params.n
    chunks = [data[i : i + n] for i in range(0, len(data), n)]
    pos = 0

    def take(count):
        nonlocal pos
        out = tuple(chunks[pos : pos + count])
        pos += count
        return out

    r = take(1)[0]
    trees = []
    for _ in range(params.k_fors):
        sk = take(1)[0]
        trees.append((sk, take(params.a)))
    layers = []
    for _ in range(params.d):
        nodes = take(params.ell)
        layers.append(XmssSignature(WotsSignature(nodes), take(params.h_prime)))
    return SlhSignature(r, ForsSignature(tuple(trees)), tuple(layers))
