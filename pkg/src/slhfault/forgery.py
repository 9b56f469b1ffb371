"""Grafting-tree forgery from a corpus of (partly faulty) signatures.

Pipeline: :func:`extract_observations` -> :func:`identify_secrets` per
instance -> :func:`graft_search` -> :func:`path_seek` -> :func:`forge`.
Nothing here reads ``SignatureRecord.fault_ground_truth``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .core import (
    Adrs,
    SlhSignature,
    WotsSignature,
    XmssSignature,
    chain,
    digest_split,
    fors_adrs,
    fors_pk_from_sig,
    fors_sign,
    root_from_leaf,
    slh_verify,
    wots_digits,
    xmss_node,
    xmss_pk_from_sig,
    xmss_sign,
)
from .core.adrs import WOTS_HASH
from .core.slh import check_shape
from .core.wots import wots_compress, wots_endpoints
from .complexity import p_signable, rank_instances
from .errors import BudgetExceeded, FormatError, NotCompromised, RangeError
from .fault import Corpus, derive_seed
from .params import ParameterSet, parameter_set
from .search import candidate_bytes, first_success

log = logging.getLogger(__name__)

SEARCH = "search"
DIRECT = "direct"


class InstanceAddress(NamedTuple):
    layer: int
    tree: int
    keypair: int

    def __str__(self):
        return f"{self.layer}:{self.tree}:{self.keypair}"

    @classmethod
    def parse(cls, text: str) -> InstanceAddress:
        return cls(*(int(x) for x in text.split(":")))


def wots_adrs(address: InstanceAddress) -> Adrs:
    adrs = Adrs.at(address.layer, address.tree)
    adrs.set_type_and_clear(WOTS_HASH)
    adrs.set_keypair(address.keypair)
    return adrs


@dataclass(frozen=True)
class WotsObservation:
    address: InstanceAddress
    signed_value: bytes  # recomputed from the record's own lower layers
    wots_sig: WotsSignature
    auth_path: tuple[bytes, ...]
    digits: tuple[int, ...]  # positions implied by signed_value
    implied_root: bytes  # tree root implied by (wots_sig, signed_value, auth_path)
    ordinal: int
    upper_layers: tuple[XmssSignature, ...]
    authentic: bool = False  # implied_root matches an authenticated tree root
    upper_authentic: bool = False  # upper_layers authenticate this tree's true root
    record_verifies: bool = False


@dataclass
class Extraction:
    groups: dict[InstanceAddress, list[WotsObservation]]
    tree_roots: dict[tuple[int, int], bytes]  # authenticated (layer, tree) -> root
    skipped: int = 0

    def candidates(self) -> dict[InstanceAddress, list[WotsObservation]]:
        """Groups holding at least two different WOTS+ signatures."""
        return {a: g for a, g in self.groups.items() if len({bytes(o.wots_sig) for o in g}) >= 2}


def extract_observations(corpus: Corpus) -> Extraction:
    """One observation per (record, layer), then authenticate roots top down."""
    params = corpus.params
    pk_seed, pk_root = corpus.pk_seed, corpus.pk_root
    raw = []  # (ordinal, layer, address, value, xsig, digits, implied_root, upper)
    skipped = 0
    for ordinal, record in enumerate(corpus.records):
        sig = record.signature
        try:
            check_shape(params, sig)
        except FormatError as exc:
            log.warning("skipping record %d: %s", ordinal, exc)
            skipped += 1
            continue
        split = digest_split(params, sig.randomizer, pk_seed, pk_root, record.message)
        path = split.path(params)
        tree0, leaf0 = path[0]
        value = fors_pk_from_sig(params, sig.fors_sig, split.fors_indices, pk_seed, fors_adrs(tree0, leaf0))
        for layer, ((tree, leaf), xsig) in enumerate(zip(path, sig.ht_sigs)):
            root = xmss_pk_from_sig(params, xsig, value, leaf, pk_seed, Adrs.at(layer, tree))
            raw.append(
                (
                    ordinal,
                    InstanceAddress(layer, tree, leaf),
                    value,
                    xsig,
                    tuple(wots_digits(params, value)),
                    root,
                    sig.ht_sigs[layer + 1 :],
                )
            )
            value = root

    tree_roots = {(params.d - 1, 0): pk_root}
    authentic = {}  # (ordinal, layer) -> bool
    for item in sorted(raw, key=lambda r: -r[1].layer):
        ordinal, addr, value, _, _, root, _ = item
        ok = tree_roots.get((addr.layer, addr.tree)) == root
        authentic[(ordinal, addr.layer)] = ok
        if ok and addr.layer > 0:
            tree_roots.setdefault((addr.layer - 1, (addr.tree << params.h_prime) | addr.keypair), value)

    groups: dict[InstanceAddress, list[WotsObservation]] = {}
    for ordinal, addr, value, xsig, digits, root, upper in raw:
        top = addr.layer == params.d - 1
        groups.setdefault(addr, []).append(
            WotsObservation(
                address=addr,
                signed_value=value,
                wots_sig=xsig.wots_sig,
                auth_path=xsig.auth_path,
                digits=digits,
                implied_root=root,
                ordinal=ordinal,
                upper_layers=tuple(upper),
                authentic=authentic[(ordinal, addr.layer)],
                upper_authentic=top or authentic[(ordinal, addr.layer + 1)],
                record_verifies=authentic[(ordinal, 0)],
            )
        )
    return Extraction(groups, tree_roots, skipped)


@dataclass(frozen=True)
class CompromisedInstance:
    address: InstanceAddress
    exposed_min: tuple[int, ...]  # minimal revealed position per chain (ell values)
    exposed_nodes: tuple[bytes, ...]  # chain values at those positions
    auth_path: tuple[bytes, ...]
    upper_layers: tuple[XmssSignature, ...]  # layers above address.layer
    observations: int
    distinct: int
    identification_hashes: int = 0
    tree_root: Optional[bytes] = None

    @property
    def layer(self) -> int:
        return self.address.layer


class _Counter:
    def __init__(self):
        self.hashes = 0

    def chain(self, params, x, start, steps, pk_seed, adrs):
        self.hashes += steps
        return chain(params, x, start, steps, pk_seed, adrs)


def _endpoint_candidates(params, node, i, pk_seed, adrs, counter):
    """{endpoint: position} for every position ``node`` could sit at on chain ``i``."""
    adrs.set_chain(i)
    w = params.w
    out = {}
    for k in range(w):
        end = counter.chain(params, node, k, w - 1 - k, pk_seed, adrs)
        out.setdefault(end, k)
    return out


def _root_checker(params, pk_seed, group, reference_root, pk_root, counter):
    """Predicate telling whether a candidate tree root is the true one.

    Uses the authenticated root when known, otherwise the (clean) upper layer
    signatures carried by the group, which must lead to ``pk_root``.
    """
    if reference_root is not None:
        return lambda root: root == reference_root
    if pk_root is None:
        return None
    address = group[0].address
    upper = next((o.upper_layers for o in group if o.upper_authentic), group[0].upper_layers)
    if len(upper) != params.d - 1 - address.layer:
        return None

    def check(root):
        value, tree = root, address.tree
        for layer, xsig in enumerate(upper, start=address.layer + 1):
            leaf, tree = tree & (params.leaves_per_tree - 1), tree >> params.h_prime
            counter.hashes += sum(params.w - 1 - d for d in wots_digits(params, value)) + 1 + params.h_prime
            value = xmss_pk_from_sig(params, xsig, value, leaf, pk_seed, Adrs.at(layer, tree))
        return value == pk_root

    return check


def _anchor_endpoints(params, pk_seed, group, is_root, counter, max_combos):
    """Chain endpoints consistent with every observation and the true tree root.

    Positions are tied to the hash address of each step, so two different
    values on one chain pin down each other's position; chains where every
    observation revealed the same value are resolved against the root.
    """
    address = group[0].address
    adrs = wots_adrs(address)
    per_chain = []
    for i in range(params.ell):
        nodes = {o.wots_sig.nodes[i] for o in group}
        common = None
        for node in sorted(nodes):
            cands = set(_endpoint_candidates(params, node, i, pk_seed, adrs, counter))
            common = cands if common is None else common & cands
        if not common:
            raise NotCompromised("corrupt-group", f"chain {i} has no common endpoint")
        per_chain.append(sorted(common))
    combos = 1
    for c in per_chain:
        combos *= len(c)
    if combos > max_combos:
        raise NotCompromised("no-reference", f"{combos} endpoint combinations")
    auth = group[0].auth_path
    found = None
    for ends in itertools.product(*per_chain):
        leaf = wots_compress(params, ends, pk_seed, adrs)
        counter.hashes += 1 + params.h_prime
        if is_root(root_from_leaf(params, leaf, address.keypair, auth, pk_seed, Adrs.at(address.layer, address.tree))):
            # a second match can only come from a hash collision; refuse to guess
            if found is not None:
                raise NotCompromised("corrupt-group", "several endpoint sets reproduce the tree root")
            found = list(ends)
    if found is None:
        raise NotCompromised("corrupt-group", "no endpoint set reproduces the tree root")
    return found


def _search_positions(params, sig, endpoints, pk_seed, adrs, counter):
    """Exhaustive search: the position k at which each node chains to its endpoint."""
    w = params.w
    out = []
    for i, (node, end) in enumerate(zip(sig.nodes, endpoints)):
        adrs.set_chain(i)
        for k in range(w):
            if counter.chain(params, node, k, w - 1 - k, pk_seed, adrs) == end:
                out.append(k)
                break
        else:
            return None
    return out


def _direct_positions(params, obs, endpoints, pk_seed, adrs, counter):
    """Positions read off the recomputed signed value, kept only if they reach the endpoints."""
    w = params.w
    for i, (node, d) in enumerate(zip(obs.wots_sig.nodes, obs.digits)):
        adrs.set_chain(i)
        if counter.chain(params, node, d, w - 1 - d, pk_seed, adrs) != endpoints[i]:
            return None
    return list(obs.digits)


def identify_secrets(
    params: ParameterSet,
    pk_seed: bytes,
    group: list[WotsObservation],
    reference_root: Optional[bytes] = None,
    mode: str = SEARCH,
    max_combos: int = 1 << 16,
    pk_root: Optional[bytes] = None,
) -> CompromisedInstance:
    """Combine the chain values exposed by all observations of one WOTS+ key pair.

    Reference endpoints come from an authenticated observation when one
    exists, otherwise from anchoring the observations against
    ``reference_root`` (the authenticated root of the instance's tree) or,
    failing that, against the upper layers and ``pk_root``.
    """
    if mode not in (SEARCH, DIRECT):
        raise ValueError(f"unknown identification mode {mode!r}")
    if not group:
        raise NotCompromised("single-observation", "empty group")
    address = group[0].address
    if any(o.address != address for o in group):
        raise ValueError("observations from different instances")
    unique = {}
    for o in group:
        unique.setdefault(bytes(o.wots_sig), o)
    if len(unique) < 2:
        raise NotCompromised("single-observation", f"{len(group)} identical signature(s)")

    counter = _Counter()
    adrs = wots_adrs(address)
    ref = next((o for o in group if o.authentic), None)
    if ref is not None:
        endpoints = wots_endpoints(params, ref.wots_sig, ref.digits, pk_seed, adrs)
        counter.hashes += sum(params.w - 1 - d for d in ref.digits)
    else:
        is_root = _root_checker(params, pk_seed, group, reference_root, pk_root, counter)
        if is_root is None:
            raise NotCompromised("no-reference", "no authenticated observation or tree root")
        endpoints = _anchor_endpoints(params, pk_seed, list(unique.values()), is_root, counter, max_combos)

    accepted = []  # (positions, observation)
    for obs in unique.values():
        if mode == SEARCH:
            pos = _search_positions(params, obs.wots_sig, endpoints, pk_seed, adrs, counter)
        else:
            pos = _direct_positions(params, obs, endpoints, pk_seed, adrs, counter)
        if pos is None:
            log.debug("discarding observation from record %d at %s", obs.ordinal, address)
            continue
        accepted.append((pos, obs))
    if not accepted:
        raise NotCompromised("corrupt-group", "no observation matches the endpoints")
    if len({tuple(p) for p, _ in accepted}) < 2:
        raise NotCompromised("no-collision", "all accepted observations sign one value")

    exposed_min, exposed_nodes = [], []
    for i in range(params.ell):
        pos, obs = min(accepted, key=lambda item: item[0][i])
        exposed_min.append(pos[i])
        exposed_nodes.append(obs.wots_sig.nodes[i])

    members = [o for _, o in accepted] + list(group)
    upper_src = (
        next((o for o in members if o.record_verifies), None)
        or next((o for o in members if o.upper_authentic), None)
        or members[0]
    )
    return CompromisedInstance(
        address=address,
        exposed_min=tuple(exposed_min),
        exposed_nodes=tuple(exposed_nodes),
        auth_path=upper_src.auth_path,
        upper_layers=upper_src.upper_layers,
        observations=len(group),
        distinct=len({tuple(p) for p, _ in accepted}),
        identification_hashes=counter.hashes,
        tree_root=reference_root,
    )


def find_compromised(
    extraction: Extraction,
    params: ParameterSet,
    pk_seed: bytes,
    mode: str = SEARCH,
    pk_root: Optional[bytes] = None,
) -> list[CompromisedInstance]:
    if pk_root is None:
        pk_root = extraction.tree_roots.get((params.d - 1, 0))
    found = []
    for address, group in sorted(extraction.candidates().items()):
        root = extraction.tree_roots.get((address.layer, address.tree))
        try:
            found.append(identify_secrets(params, pk_seed, group, root, mode, pk_root=pk_root))
        except NotCompromised as exc:
            log.info("instance %s not usable: %s", address, exc)
    return found


# ---------------------------------------------------------------------------
# grafting and path seeking


def grafted_index(params: ParameterSet, instance: CompromisedInstance) -> int:
    """Index of the layer below the compromised leaf: tree * 2^h' + keypair."""
    return (instance.address.tree << params.h_prime) | instance.address.keypair


def signable(digits, exposed_min) -> bool:
    return all(r >= m for r, m in zip(digits, exposed_min))


@dataclass(frozen=True)
class GraftResult:
    sk_seed: bytes
    root: bytes
    digits: tuple[int, ...]
    layer: int  # layer of the grafted tree (compromised layer - 1)
    index: int  # tree index of the grafted tree within that layer
    attempts: int
    work: int = 0
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": "graft",
            "seed_hex": self.sk_seed.hex(),
            "root_hex": self.root.hex(),
            "digits": ",".join(map(str, self.digits)),
            "layer": self.layer,
            "index": self.index,
            "attempts": self.attempts,
            "work": self.work,
            "rng_seed": self.seed,
        }

    @classmethod
    def from_dict(cls, row: dict) -> GraftResult:
        try:
            return cls(
                sk_seed=bytes.fromhex(row["seed_hex"]),
                root=bytes.fromhex(row["root_hex"]),
                digits=tuple(int(x) for x in row["digits"].split(",")),
                layer=int(row["layer"]),
                index=int(row["index"]),
                attempts=int(row["attempts"]),
                work=int(row.get("work", 0)),
                seed=int(row.get("rng_seed", 0)),
            )
        except (KeyError, ValueError, AttributeError) as exc:
            raise FormatError(f"bad graft record: {exc}") from None


@dataclass(frozen=True)
class PathSeekResult:
    r_prime: bytes
    attempts: int
    index: int
    wots_layer: int
    work: int = 0
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": "seek",
            "r_hex": self.r_prime.hex(),
            "index": self.index,
            "wots_layer": self.wots_layer,
            "attempts": self.attempts,
            "work": self.work,
            "rng_seed": self.seed,
        }

    @classmethod
    def from_dict(cls, row: dict) -> PathSeekResult:
        try:
            return cls(
                r_prime=bytes.fromhex(row["r_hex"]),
                attempts=int(row["attempts"]),
                index=int(row["index"]),
                wots_layer=int(row["wots_layer"]),
                work=int(row.get("work", 0)),
                seed=int(row.get("rng_seed", 0)),
            )
        except (KeyError, ValueError) as exc:
            raise FormatError(f"bad seek record: {exc}") from None


@dataclass(frozen=True)
class _GraftCandidate:
    param_set: str
    pk_seed: bytes
    layer: int
    index: int
    exposed_min: tuple[int, ...]
    base_seed: int

    def __call__(self, g):
        params = parameter_set(self.param_set)
        sk_seed = candidate_bytes(b"graft", self.base_seed, g, params.n)
        root = xmss_node(params, sk_seed, 0, params.h_prime, self.pk_seed, Adrs.at(self.layer, self.index))
        digits = wots_digits(params, root)
        if signable(digits, self.exposed_min):
            return sk_seed, root, tuple(digits)
        return None


def graft_search(
    params: ParameterSet,
    pk_seed: bytes,
    instance: CompromisedInstance,
    seed: int = 0,
    budget: int = 1 << 20,
    workers: int = 1,
) -> GraftResult:
    """Draw grafted secret seeds until the new tree root is signable."""
    if instance.layer < 1:
        raise RangeError("grafting needs a compromised instance above layer 0")
    index = grafted_index(params, instance)
    predicate = _GraftCandidate(params.name, pk_seed, instance.layer - 1, index, tuple(instance.exposed_min), seed)
    try:
        expected = 1 / float(p_signable(instance.exposed_min, params))
    except ZeroDivisionError:
        expected = None
    outcome = first_success(predicate, budget, workers, expected=expected)
    sk_seed, root, digits = outcome.value
    return GraftResult(sk_seed, root, digits, instance.layer - 1, index, outcome.attempts, outcome.work, seed)


@dataclass(frozen=True)
class _SeekCandidate:
    param_set: str
    pk_seed: bytes
    pk_root: bytes
    message: bytes
    shift: int
    index: int
    base_seed: int

    def __call__(self, g):
        params = parameter_set(self.param_set)
        r = candidate_bytes(b"seek", self.base_seed, g, params.n)
        split = digest_split(params, r, self.pk_seed, self.pk_root, self.message)
        if split.full_index(params) >> self.shift == self.index:
            return r
        return None


def path_seek(
    params: ParameterSet,
    pk_seed: bytes,
    pk_root: bytes,
    message: bytes,
    index: int,
    wots_layer: int,
    seed: int = 0,
    budget: int = 1 << 24,
    workers: int = 1,
) -> PathSeekResult:
    """Find R' routing ``message`` through subtree ``index`` below ``wots_layer``."""
    exponent = params.seeking_exponent(wots_layer)
    if not 0 <= index < (1 << exponent):
        raise RangeError(f"subtree index {index} needs more than {exponent} bits")
    predicate = _SeekCandidate(params.name, pk_seed, pk_root, message, params.h_prime * wots_layer, index, seed)
    outcome = first_success(predicate, budget, workers, expected=float(1 << exponent))
    return PathSeekResult(outcome.value, outcome.attempts, index, wots_layer, outcome.work, seed)


def forge(
    params: ParameterSet,
    pk_seed: bytes,
    pk_root: bytes,
    message: bytes,
    instance: CompromisedInstance,
    graft: GraftResult,
    seek: PathSeekResult,
) -> SlhSignature:
    """Assemble a signature on ``message`` through the grafted tree."""
    wl = instance.layer
    if seek.wots_layer != wl or graft.layer != wl - 1 or seek.index != graft.index:
        raise ValueError("graft and seek results belong to different instances")
    if not signable(graft.digits, instance.exposed_min):
        raise AssertionError("grafted root is not signable with the exposed chain values")
    split = digest_split(params, seek.r_prime, pk_seed, pk_root, message)
    if split.full_index(params) >> (params.h_prime * wl) != graft.index:
        raise ValueError("R' does not route the message through the grafted tree")
    path = split.path(params)

    tree0, leaf0 = path[0]
    f_adrs = fors_adrs(tree0, leaf0)
    fors_sig = fors_sign(params, split.fors_indices, graft.sk_seed, pk_seed, f_adrs)
    value = fors_pk_from_sig(params, fors_sig, split.fors_indices, pk_seed, f_adrs)
    layers = []
    for layer in range(wl):
        tree, leaf = path[layer]
        adrs = Adrs.at(layer, tree)
        xsig = xmss_sign(params, value, graft.sk_seed, pk_seed, leaf, adrs)
        layers.append(xsig)
        value = xmss_pk_from_sig(params, xsig, value, leaf, pk_seed, adrs)
    if value != graft.root:
        raise AssertionError("rebuilt grafted tree root differs from the graft result")

    adrs = wots_adrs(instance.address)
    nodes = []
    for i, (node, lo, hi) in enumerate(zip(instance.exposed_nodes, instance.exposed_min, graft.digits)):
        adrs.set_chain(i)
        nodes.append(chain(params, node, lo, hi - lo, pk_seed, adrs))
    layers.append(XmssSignature(WotsSignature(tuple(nodes)), instance.auth_path))
    layers.extend(instance.upper_layers)
    return SlhSignature(seek.r_prime, fors_sig, tuple(layers))


@dataclass
class AttackResult:
    instance: CompromisedInstance
    graft: GraftResult
    seeks: list[PathSeekResult] = field(default_factory=list)
    forgeries: list[SlhSignature] = field(default_factory=list)
    verified: list[bool] = field(default_factory=list)


def universal_forgery(
    corpus: Corpus,
    messages: list[bytes],
    seed: int = 0,
    workers: int = 1,
    graft_budget: int = 1 << 20,
    seek_budget: int = 1 << 24,
) -> AttackResult:
    """Full offline phase: pick the cheapest graftable instance, graft once, forge every message."""
    params = corpus.params
    extraction = extract_observations(corpus)
    instances = [c for c in find_compromised(extraction, params, corpus.pk_seed) if c.layer >= 1]
    report = rank_instances(instances, params)
    instance = report.rows[0].instance
    graft = graft_search(params, corpus.pk_seed, instance, derive_seed(seed, "graft"), graft_budget, workers)
    result = AttackResult(instance, graft)
    for k, message in enumerate(messages):
        seek = path_seek(
            params,
            corpus.pk_seed,
            corpus.pk_root,
            message,
            graft.index,
            instance.layer,
            derive_seed(seed, f"seek/{k}"),
            seek_budget,
            workers,
        )
        sig = forge(params, corpus.pk_seed, corpus.pk_root, message, instance, graft, seek)
        result.seeks.append(seek)
        result.forgeries.append(sig)
        result.verified.append(slh_verify(params, message, sig, corpus.pk_seed, corpus.pk_root))
    return result


__all__ = [
    "BudgetExceeded",
    "CompromisedInstance",
    "Extraction",
    "GraftResult",
    "InstanceAddress",
    "PathSeekResult",
    "WotsObservation",
    "extract_observations",
    "find_compromised",
    "forge",
    "graft_search",
    "grafted_index",
    "identify_secrets",
    "path_seek",
    "universal_forgery",
]
