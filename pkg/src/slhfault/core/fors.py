"""FORS few-time signatures over the message digest."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import RangeError
from ..params import ParameterSet
from .adrs import FORS_PRF, FORS_ROOTS, FORS_TREE, Adrs
from .hashing import prf, thash


@dataclass(frozen=True)
class ForsSignature:
    # per tree: (revealed secret leaf preimage, a-node auth path)
    trees: tuple[tuple[bytes, tuple[bytes, ...]], ...]

    def __bytes__(self):
        return b"".join(sk + b"".join(auth) for sk, auth in self.trees)


def fors_adrs(layer0_tree: int, keypair: int) -> Adrs:
    adrs = Adrs.at(0, layer0_tree)
    adrs.set_type_and_clear(FORS_TREE)
    adrs.set_keypair(keypair)
    return adrs


def _check_indices(params, indices):
    if len(indices) != params.k_fors:
        raise RangeError(f"expected {params.k_fors} FORS indices, got {len(indices)}")
    for idx in indices:
        if not 0 <= idx < (1 << params.a):
            raise RangeError(f"FORS index {idx} outside 0..{(1 << params.a) - 1}")


def fors_sk(params: ParameterSet, sk_seed: bytes, pk_seed: bytes, adrs: Adrs, idx: int) -> bytes:
    sk_adrs = Adrs.at(adrs.layer, adrs.tree)
    sk_adrs.set_type_and_clear(FORS_PRF)
    sk_adrs.set_keypair(adrs.keypair)
    sk_adrs.set_tree_index(idx)
    return prf(params, pk_seed, sk_seed, sk_adrs)


def _tree_nodes(params, sk_seed, pk_seed, adrs, tree_no):
    """Every node of FORS tree ``tree_no`` keyed by (height, global index)."""
    a = params.a
    nodes = {}
    node_adrs = adrs.copy()
    base = tree_no << a
    level = []
    for j in range(1 << a):
        idx = base + j
        node_adrs.set_tree_height(0)
        node_adrs.set_tree_index(idx)
        leaf = thash(params, pk_seed, node_adrs, fors_sk(params, sk_seed, pk_seed, adrs, idx))
        nodes[(0, idx)] = leaf
        level.append(leaf)
    for z in range(1, a + 1):
        base >>= 1
        nxt = []
        for j in range(len(level) // 2):
            node_adrs.set_tree_height(z)
            node_adrs.set_tree_index(base + j)
            node = thash(params, pk_seed, node_adrs, level[2 * j] + level[2 * j + 1])
            nodes[(z, base + j)] = node
            nxt.append(node)
        level = nxt
    return nodes


def _compress_roots(params, pk_seed, adrs, roots):
    pk_adrs = Adrs.at(adrs.layer, adrs.tree)
    pk_adrs.set_type_and_clear(FORS_ROOTS)
    pk_adrs.set_keypair(adrs.keypair)
    return thash(params, pk_seed, pk_adrs, b"".join(roots))


def fors_keygen(params: ParameterSet, sk_seed: bytes, pk_seed: bytes, adrs: Adrs) -> bytes:
    """FORS public key of the key pair at ``adrs``."""
    roots = []
    for t in range(params.k_fors):
        nodes = _tree_nodes(params, sk_seed, pk_seed, adrs, t)
        roots.append(nodes[(params.a, t)])
    return _compress_roots(params, pk_seed, adrs, roots)


def fors_sign(params: ParameterSet, indices, sk_seed: bytes, pk_seed: bytes, adrs: Adrs) -> ForsSignature:
    _check_indices(params, indices)
    a = params.a
    trees = []
    for t, idx in enumerate(indices):
        nodes = _tree_nodes(params, sk_seed, pk_seed, adrs, t)
        leaf = (t << a) + idx
        auth = tuple(nodes[(j, (leaf >> j) ^ 1)] for j in range(a))
        trees.append((fors_sk(params, sk_seed, pk_seed, adrs, leaf), auth))
    return ForsSignature(tuple(trees))


def fors_pk_from_sig(params: ParameterSet, sig: ForsSignature, indices, pk_seed: bytes, adrs: Adrs) -> bytes:
    _check_indices(params, indices)
    a = params.a
    node_adrs = adrs.copy()
    roots = []
    for t, ((sk, auth), idx) in enumerate(zip(sig.trees, indices)):
        leaf = (t << a) + idx
        node_adrs.set_tree_height(0)
        node_adrs.set_tree_index(leaf)
        node = thash(params, pk_seed, node_adrs, sk)
        for j, sibling in enumerate(auth):
            node_adrs.set_tree_height(j + 1)
            node_adrs.set_tree_index(leaf >> (j + 1))
            if (leaf >> j) & 1 == 0:
                node = thash(params, pk_seed, node_adrs, node + sibling)
            else:
                node = thash(params, pk_seed, node_adrs, sibling + node)
        roots.append(node)
    return _compress_roots(params, pk_seed, adrs, roots)
