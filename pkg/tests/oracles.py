"""Independent reference code for the tests.

Nothing here imports the package's hashing, address or tree code: addresses
are packed with ``struct``, hashes come straight from ``hashlib``, trees are
built bottom up with lists.  Only ParameterSet values are shared.
"""

import hashlib
import itertools
import struct
from fractions import Fraction

WOTS_HASH, WOTS_PK, TREE, FORS_TREE, FORS_ROOTS, WOTS_PRF, FORS_PRF = range(7)


def adrs(layer, tree, kind, keypair=0, word2=0, word3=0):
    return struct.pack(">I", layer) + tree.to_bytes(12, "big") + struct.pack(">IIII", kind, keypair, word2, word3)


def H(params, pk_seed, address, data):
    if params.hash_family == "SHA2":
        return hashlib.sha256(pk_seed + address + data).digest()[: params.n]
    return hashlib.shake_256(pk_seed + address + data).digest(params.n)


def digits_of(params, value):
    bits = "".join(f"{b:08b}" for b in value)
    msg = [int(bits[i * params.lg_w : (i + 1) * params.lg_w], 2) for i in range(params.ell1)]
    csum = sum(params.w - 1 - m for m in msg)
    check = []
    for j in reversed(range(params.ell2)):
        check.append(csum // params.w**j % params.w)
    return msg + check


def secret(params, sk_seed, pk_seed, layer, tree, keypair, i):
    return H(params, pk_seed, adrs(layer, tree, WOTS_PRF, keypair, i, 0), sk_seed)


def walk(params, x, start, stop, pk_seed, layer, tree, keypair, i):
    for j in range(start, stop):
        x = H(params, pk_seed, adrs(layer, tree, WOTS_HASH, keypair, i, j), x)
    return x


def wots_pk(params, sk_seed, pk_seed, layer, tree, keypair):
    ends = b""
    for i in range(params.ell):
        sk = secret(params, sk_seed, pk_seed, layer, tree, keypair, i)
        ends += walk(params, sk, 0, params.w - 1, pk_seed, layer, tree, keypair, i)
    return H(params, pk_seed, adrs(layer, tree, WOTS_PK, keypair), ends)


def wots_sig(params, value, sk_seed, pk_seed, layer, tree, keypair):
    out = []
    for i, d in enumerate(digits_of(params, value)):
        sk = secret(params, sk_seed, pk_seed, layer, tree, keypair, i)
        out.append(walk(params, sk, 0, d, pk_seed, layer, tree, keypair, i))
    return out


def merkle_levels(params, sk_seed, pk_seed, layer, tree):
    """levels[z][i] for the whole XMSS tree, built bottom up."""
    levels = [[wots_pk(params, sk_seed, pk_seed, layer, tree, j) for j in range(2**params.h_prime)]]
    for z in range(1, params.h_prime + 1):
        prev = levels[-1]
        levels.append(
            [H(params, pk_seed, adrs(layer, tree, TREE, 0, z, i), prev[2 * i] + prev[2 * i + 1]) for i in range(len(prev) // 2)]
        )
    return levels


def compositions(total, bounds):
    """Count vectors with the given sum and per-component bounds by enumeration."""
    return sum(1 for x in itertools.product(*(range(k + 1) for k in bounds)) if sum(x) == total)


def signable_fraction(params, exposed_min):
    """Fraction of message digit vectors dominating ``exposed_min``, checksum included."""
    w, ell1, ell2 = params.w, params.ell1, params.ell2
    hits = 0
    for msg in itertools.product(range(w), repeat=ell1):
        csum = sum(w - 1 - m for m in msg)
        check = [csum // w**j % w for j in reversed(range(ell2))]
        if all(a >= b for a, b in zip(list(msg) + check, exposed_min)):
            hits += 1
    return Fraction(hits, w**ell1)
