"""XMSS trees: recursive node computation, signing, root recovery."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from ..errors import RangeError
from ..params import ParameterSet
from .adrs import TREE, WOTS_HASH, Adrs
from .hashing import thash
from .wots import WotsSignature, wots_pk_from_sig, wots_pkgen, wots_sign

# hook(z, i, lnode) -> lnode, called inside the height-z node i computation
LnodeHook = Callable[[int, int, bytes], bytes]


@dataclass(frozen=True)
class XmssSignature:
    wots_sig: WotsSignature
    auth_path: tuple[bytes, ...]

    def __bytes__(self):
        return bytes(self.wots_sig) + b"".join(self.auth_path)


def xmss_node(
    params: ParameterSet,
    sk_seed: bytes,
    i: int,
    z: int,
    pk_seed: bytes,
    adrs: Adrs,
    *,
    lnode_hook: Optional[LnodeHook] = None,
    record: Optional[dict] = None,
) -> bytes:
    """Root of the height-``z`` subtree with index ``i``, computed depth first.

    ``lnode_hook`` sees every left-child value while it waits for the right
    subtree; whatever it returns is what gets hashed.  ``record`` collects
    every computed node as ``{(z, i): node}``.
    """
    if not 0 <= z <= params.h_prime or not 0 <= i < (1 << (params.h_prime - z)):
        raise RangeError(f"node ({z}, {i}) outside a height-{params.h_prime} tree")
    return _node(params, sk_seed, i, z, pk_seed, adrs, lnode_hook, record)


def _node(params, sk_seed, i, z, pk_seed, adrs, hook, record):
    if z == 0:
        leaf = Adrs.at(adrs.layer, adrs.tree)
        leaf.set_type_and_clear(WOTS_HASH)
        leaf.set_keypair(i)
        node = wots_pkgen(params, sk_seed, pk_seed, leaf)
    else:
        lnode = _node(params, sk_seed, 2 * i, z - 1, pk_seed, adrs, hook, record)
        if hook is not None:
            lnode = hook(z, i, lnode)
        rnode = _node(params, sk_seed, 2 * i + 1, z - 1, pk_seed, adrs, hook, record)
        parent = Adrs.at(adrs.layer, adrs.tree)
        parent.set_type_and_clear(TREE)
        parent.set_tree_height(z)
        parent.set_tree_index(i)
        node = thash(params, pk_seed, parent, lnode + rnode)
    if record is not None:
        record[(z, i)] = node
    return node


def tree_nodes(params: ParameterSet, sk_seed: bytes, pk_seed: bytes, adrs: Adrs) -> dict:
    """All nodes of the tree at ``adrs`` keyed by ``(height, index)``."""
    nodes: dict = {}
    xmss_node(params, sk_seed, 0, params.h_prime, pk_seed, adrs, record=nodes)
    return nodes


def auth_path_from_nodes(params: ParameterSet, nodes: dict, leaf: int) -> tuple[bytes, ...]:
    return tuple(nodes[(j, (leaf >> j) ^ 1)] for j in range(params.h_prime))


def _sign_with_nodes(params, value, sk_seed, pk_seed, leaf, adrs, nodes):
    wots_adrs = Adrs.at(adrs.layer, adrs.tree)
    wots_adrs.set_type_and_clear(WOTS_HASH)
    wots_adrs.set_keypair(leaf)
    sig = wots_sign(params, value, sk_seed, pk_seed, wots_adrs)
    return XmssSignature(sig, auth_path_from_nodes(params, nodes, leaf))


def xmss_sign(params: ParameterSet, value: bytes, sk_seed: bytes, pk_seed: bytes, leaf: int, adrs: Adrs) -> XmssSignature:
    if not 0 <= leaf < params.leaves_per_tree:
        raise RangeError(f"leaf {leaf} outside 0..{params.leaves_per_tree - 1}")
    nodes = tree_nodes(params, sk_seed, pk_seed, adrs)
    return _sign_with_nodes(params, value, sk_seed, pk_seed, leaf, adrs, nodes)


def root_from_leaf(params: ParameterSet, leaf_pk: bytes, leaf: int, auth_path, pk_seed: bytes, adrs: Adrs) -> bytes:
    """Climb from a compressed WOTS+ key to the tree root along ``auth_path``."""
    node = leaf_pk
    parent = Adrs.at(adrs.layer, adrs.tree)
    parent.set_type_and_clear(TREE)
    for k, sibling in enumerate(auth_path):
        parent.set_tree_height(k + 1)
        parent.set_tree_index(leaf >> (k + 1))
        if (leaf >> k) & 1 == 0:
            node = thash(params, pk_seed, parent, node + sibling)
        else:
            node = thash(params, pk_seed, parent, sibling + node)
    return node


def xmss_pk_from_sig(params: ParameterSet, sig: XmssSignature, value: bytes, leaf: int, pk_seed: bytes, adrs: Adrs) -> bytes:
    if not 0 <= leaf < params.leaves_per_tree:
        raise RangeError(f"leaf {leaf} outside 0..{params.leaves_per_tree - 1}")
    wots_adrs = Adrs.at(adrs.layer, adrs.tree)
    wots_adrs.set_type_and_clear(WOTS_HASH)
    wots_adrs.set_keypair(leaf)
    leaf_pk = wots_pk_from_sig(params, sig.wots_sig, value, pk_seed, wots_adrs)
    return root_from_leaf(params, leaf_pk, leaf, sig.auth_path, pk_seed, adrs)
