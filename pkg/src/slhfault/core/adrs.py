"""32-byte hash address (FIPS 205 layout)."""

from __future__ import annotations

WOTS_HASH = 0
WOTS_PK = 1
TREE = 2
FORS_TREE = 3
FORS_ROOTS = 4
WOTS_PRF = 5
FORS_PRF = 6

TYPE_NAMES = {
    WOTS_HASH: "WOTS_HASH",
    WOTS_PK: "WOTS_PK",
    TREE: "TREE",
    FORS_TREE: "FORS_TREE",
    FORS_ROOTS: "FORS_ROOTS",
    WOTS_PRF: "WOTS_PRF",
    FORS_PRF: "FORS_PRF",
}


def _get(buf, lo, hi):
    return int.from_bytes(buf[lo:hi], "big")


class Adrs:
    """Mutable address.

    Layout: layer [0:4], tree [4:16], type [16:20], keypair [20:24],
    chain / tree height [24:28], hash / tree index [28:32].
    """

    __slots__ = ("a",)

    def __init__(self, data=None):
        self.a = bytearray(32) if data is None else bytearray(data)
        if len(self.a) != 32:
            raise ValueError("address must be 32 bytes")

    @classmethod
    def at(cls, layer: int, tree: int) -> Adrs:
        adrs = cls()
        adrs.set_layer(layer)
        adrs.set_tree(tree)
        return adrs

    def copy(self) -> Adrs:
        return Adrs(self.a)

    def __bytes__(self):
        return bytes(self.a)

    def __eq__(self, other):
        return isinstance(other, Adrs) and self.a == other.a

    def __hash__(self):
        return hash(bytes(self.a))

    def __repr__(self):
        return (
            f"Adrs(layer={self.layer}, tree={self.tree}, type={TYPE_NAMES.get(self.type_tag, self.type_tag)}, "
            f"keypair={self.keypair}, chain_or_height={self.chain_or_height}, hash_or_index={self.hash_or_index})"
        )

    def set_layer(self, x: int):
        self.a[0:4] = x.to_bytes(4, "big")

    def set_tree(self, x: int):
        self.a[4:16] = x.to_bytes(12, "big")

    def set_type_and_clear(self, t: int):
        self.a[16:20] = t.to_bytes(4, "big")
        self.a[20:32] = bytes(12)

    def set_keypair(self, x: int):
        self.a[20:24] = x.to_bytes(4, "big")

    def set_chain(self, x: int):
        self.a[24:28] = x.to_bytes(4, "big")

    set_tree_height = set_chain

    def set_hash(self, x: int):
        self.a[28:32] = x.to_bytes(4, "big")

    set_tree_index = set_hash

    @property
    def layer(self) -> int:
        return _get(self.a, 0, 4)

    @property
    def tree(self) -> int:
        return _get(self.a, 4, 16)

    @property
    def type_tag(self) -> int:
        return _get(self.a, 16, 20)

    @property
    def keypair(self) -> int:
        return _get(self.a, 20, 24)

    @property
    def chain_or_height(self) -> int:
        return _get(self.a, 24, 28)

    @property
    def hash_or_index(self) -> int:
        return _get(self.a, 28, 32)
