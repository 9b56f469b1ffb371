"""Fault-free SLH-DSA reference logic."""

from .adrs import Adrs
from .fors import ForsSignature, fors_adrs, fors_keygen, fors_pk_from_sig, fors_sign
from .hashing import h_msg, prf, prf_msg, thash
from .slh import (
    DETERMINISTIC,
    MODES,
    RANDOMIZED,
    DigestSplit,
    KeyPair,
    SlhSignature,
    decode_signature,
    digest_split,
    encode_signature,
    keypair_from_seeds,
    layer_path,
    slh_keygen,
    slh_sign,
    slh_verify,
)
from .wots import (
    WotsSignature,
    base_w,
    chain,
    digits_value,
    wots_checksum,
    wots_digits,
    wots_pk_from_sig,
    wots_pkgen,
    wots_sign,
)
from .xmss import XmssSignature, root_from_leaf, xmss_node, xmss_pk_from_sig, xmss_sign

__all__ = [
    "Adrs",
    "DETERMINISTIC",
    "DigestSplit",
    "ForsSignature",
    "KeyPair",
    "MODES",
    "RANDOMIZED",
    "SlhSignature",
    "WotsSignature",
    "XmssSignature",
    "base_w",
    "chain",
    "decode_signature",
    "digest_split",
    "digits_value",
    "encode_signature",
    "fors_adrs",
    "fors_keygen",
    "fors_pk_from_sig",
    "fors_sign",
    "h_msg",
    "keypair_from_seeds",
    "layer_path",
    "prf",
    "prf_msg",
    "root_from_leaf",
    "slh_keygen",
    "slh_sign",
    "slh_verify",
    "thash",
    "wots_checksum",
    "wots_digits",
    "wots_pk_from_sig",
    "wots_pkgen",
    "wots_sign",
    "xmss_node",
    "xmss_pk_from_sig",
    "xmss_sign",
]
