"""Shared test utilities built on the package's public API."""

from slhfault.core import Adrs, digest_split, fors_adrs, fors_pk_from_sig, slh_sign, xmss_node, xmss_pk_from_sig


def inconsistent_layers(params, record, keypair):
    """Layers whose WOTS+ part does not sign the true root of the tree below.

    Each layer is checked in isolation: it is fed the true lower root (the
    FORS key for layer 0) and its implied root is compared with the true one.
    """
    sig = record.signature
    pk_seed = keypair.pk_seed
    split = digest_split(params, sig.randomizer, pk_seed, keypair.pk_root, record.message)
    path = split.path(params)
    value = fors_pk_from_sig(params, sig.fors_sig, split.fors_indices, pk_seed, fors_adrs(*path[0]))
    bad = []
    for layer, ((tree, leaf), xsig) in enumerate(zip(path, sig.ht_sigs)):
        adrs = Adrs.at(layer, tree)
        true = xmss_node(params, keypair.sk_seed, 0, params.h_prime, pk_seed, adrs)
        if xmss_pk_from_sig(params, xsig, value, leaf, pk_seed, adrs) != true:
            bad.append(layer)
        value = true
    return bad


def differing_parts(params, record, keypair):
    """Parts of a deterministic record that differ from the clean signature."""
    assert record.mode == "det"
    sig = record.signature
    clean = slh_sign(params, record.message, keypair, "det")
    parts = []
    if sig.randomizer != clean.randomizer:
        parts.append("R")
    if sig.fors_sig != clean.fors_sig:
        parts.append("fors")
    for layer, (a, b) in enumerate(zip(sig.ht_sigs, clean.ht_sigs)):
        if a.wots_sig != b.wots_sig:
            parts.append(f"wots{layer}")
        if a.auth_path != b.auth_path:
            parts.append(f"auth{layer}")
    return parts
