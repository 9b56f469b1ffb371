"""Simulated bit-flip fault oracle, victim signer, signing campaigns, corpus files.

The oracle stands in for a hammering primitive: while the victim computes
the root of the XMSS tree at ``target_layer``, one ``lnode`` slot is XORed
with a bit mask.  Path selection is untouched; only the root handed to the
next layer's WOTS+ key pair is corrupted.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Protocol

from .core import (
    DETERMINISTIC,
    MODES,
    KeyPair,
    SlhSignature,
    decode_signature,
    encode_signature,
    slh_sign,
)
from .errors import FormatError
from .params import ParameterSet, parameter_set

log = logging.getLogger(__name__)

ALWAYS = "always"
NTH = "nth"
PROB = "prob"


@dataclass(frozen=True)
class Trigger:
    kind: str = ALWAYS
    value: float = 0

    @classmethod
    def parse(cls, text: str) -> Trigger:
        """``always``, ``nth=N`` (1-based signing ordinal) or ``prob=P``."""
        if text == ALWAYS:
            return cls()
        kind, sep, arg = text.partition("=")
        if not sep or kind not in (NTH, PROB):
            raise ValueError(f"bad trigger {text!r}")
        if kind == NTH:
            n = int(arg)
            if n < 1:
                raise ValueError("nth trigger is 1-based")
            return cls(NTH, n)
        p = float(arg)
        if not 0 <= p <= 1:
            raise ValueError("probability outside [0, 1]")
        return cls(PROB, p)

    def __str__(self):
        if self.kind == ALWAYS:
            return ALWAYS
        if self.kind == NTH:
            return f"{NTH}={int(self.value)}"
        return f"{PROB}={self.value:g}"

    def fires(self, ordinal: int, rng: random.Random) -> bool:
        if self.kind == ALWAYS:
            return True
        if self.kind == NTH:
            return ordinal == int(self.value)
        return rng.random() < self.value


@dataclass(frozen=True)
class FaultSpec:
    """What to flip.

    ``level_in_tree`` and ``bit_index`` may be ``None``; the victim then draws
    them per firing, which models flips landing at different moments of the
    tree computation.  The lnode instance hit at that level is always drawn.
    """

    target_layer: int
    level_in_tree: Optional[int] = None
    bit_index: Optional[int] = None
    trigger: Trigger = field(default_factory=Trigger)
    armed: bool = True
    flips: int = 1

    def validate(self, params: ParameterSet) -> FaultSpec:
        # the top layer root is never signed, so a fault there cannot leak anything
        if not 0 <= self.target_layer < params.d - 1:
            raise ValueError(f"target layer {self.target_layer} outside 0..{params.d - 2}")
        if self.level_in_tree is not None and not 1 <= self.level_in_tree <= params.h_prime:
            raise ValueError(f"level {self.level_in_tree} outside 1..{params.h_prime}")
        if self.bit_index is not None and not 0 <= self.bit_index < 8 * params.n:
            raise ValueError(f"bit {self.bit_index} outside 0..{8 * params.n - 1}")
        if self.flips < 1 or (self.bit_index is not None and self.flips != 1):
            raise ValueError("multi-bit flips need a random bit index")
        return self

    @classmethod
    def parse(cls, text: str) -> FaultSpec:
        """``layer:level:bit:trigger``; ``*`` leaves level or bit random."""
        parts = text.split(":")
        if len(parts) != 4:
            raise ValueError(f"fault spec {text!r} is not layer:level:bit:trigger")
        layer, level, bit, trig = parts
        return cls(
            target_layer=int(layer),
            level_in_tree=None if level == "*" else int(level),
            bit_index=None if bit == "*" else int(bit),
            trigger=Trigger.parse(trig),
        )

    def __str__(self):
        level = "*" if self.level_in_tree is None else self.level_in_tree
        bit = "*" if self.bit_index is None else self.bit_index
        return f"{self.target_layer}:{level}:{bit}:{self.trigger}"


@dataclass(frozen=True)
class FaultEvent:
    layer: int
    level: int
    bit: int  # lowest flipped bit when flips > 1
    invocation: int  # index of the hit node at that level

    def __str__(self):
        return f"{self.layer}:{self.level}:{self.bit}:{self.invocation}"

    @classmethod
    def parse(cls, text: str) -> FaultEvent:
        layer, level, bit, inv = (int(x) for x in text.split(":"))
        return cls(layer, level, bit, inv)


@dataclass(frozen=True)
class SignatureRecord:
    message: bytes
    signature: SlhSignature
    mode: str
    # evaluation-only ground truth; the forgery engine never reads it
    fault_ground_truth: Optional[FaultEvent] = None

    @property
    def randomizer_r(self) -> bytes:
        return self.signature.randomizer


def _flip_mask(bits, n):
    mask = 0
    for b in bits:
        mask |= 1 << b
    return mask.to_bytes(n, "big")


def faulty_sign(
    params: ParameterSet,
    message: bytes,
    keypair: KeyPair,
    mode: str,
    fault: Optional[FaultSpec],
    rng: random.Random,
    ordinal: int = 1,
) -> SignatureRecord:
    """Sign ``message``, flipping an lnode bit if ``fault`` fires for this signing.

    Bit ``b`` counts from the least significant bit of the big-endian slot.
    Randomized mode draws its extra randomness from ``rng``.
    """
    opt_rand = rng.randbytes(params.n) if mode != DETERMINISTIC else None
    if fault is None or not fault.armed or not fault.trigger.fires(ordinal, rng):
        sig = slh_sign(params, message, keypair, mode, opt_rand)
        return SignatureRecord(message, sig, mode)

    fault.validate(params)
    level = fault.level_in_tree or rng.randint(1, params.h_prime)
    if fault.bit_index is not None:
        bits = [fault.bit_index]
    else:
        bits = rng.sample(range(8 * params.n), fault.flips)
    invocation = rng.randrange(1 << (params.h_prime - level))
    mask = _flip_mask(bits, params.n)

    def hook(z, i, lnode):
        if z == level and i == invocation:
            return bytes(x ^ y for x, y in zip(lnode, mask))
        return lnode

    sig = slh_sign(params, message, keypair, mode, opt_rand, root_hooks={fault.target_layer: hook})
    event = FaultEvent(fault.target_layer, level, min(bits), invocation)
    return SignatureRecord(message, sig, mode, event)


# ---------------------------------------------------------------------------
# victim wrapper and campaigns


class VictimWrapper(Protocol):
    def start(self) -> None: ...

    def init(self, message: bytes) -> None: ...

    def check(self) -> SignatureRecord: ...

    def stop(self) -> None: ...


class SimulatedSigner:
    """In-process signing server whose computation is exposed to the fault oracle."""

    def __init__(self, params: ParameterSet, keypair: KeyPair, mode: str, fault: Optional[FaultSpec], seed: int):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if fault is not None:
            fault.validate(params)
        self.params = params
        self.keypair = keypair
        self.mode = mode
        self.fault = fault
        self.rng = random.Random(seed)
        self.ordinal = 0
        self.running = False
        self._pending: Optional[SignatureRecord] = None

    def start(self):
        self.running = True

    def init(self, message: bytes):
        if not self.running:
            raise RuntimeError("victim not started")
        self.ordinal += 1
        self._pending = faulty_sign(self.params, message, self.keypair, self.mode, self.fault, self.rng, self.ordinal)

    def check(self) -> SignatureRecord:
        if self._pending is None:
            raise RuntimeError("no signature pending")
        record, self._pending = self._pending, None
        return record

    def stop(self):
        self.running = False


FIXED = "fixed"
RANDOM = "random"


@dataclass
class CampaignConfig:
    param_set: str
    mode: str = DETERMINISTIC
    message_policy: str = FIXED
    message: bytes = b"slh-dsa lab message"
    fault: Optional[FaultSpec] = None
    count: int = 16
    seed: int = 0
    out: Optional[Path] = None

    def validate(self) -> ParameterSet:
        params = parameter_set(self.param_set)
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.message_policy not in (FIXED, RANDOM):
            raise ValueError(f"unknown message policy {self.message_policy!r}")
        if self.count < 0:
            raise ValueError("negative record count")
        if self.fault is not None:
            self.fault.validate(params)
        return params


@dataclass
class Corpus:
    param_set: str
    pk_seed: bytes
    pk_root: bytes
    records: list[SignatureRecord] = field(default_factory=list)
    complete: bool = True

    @property
    def params(self) -> ParameterSet:
        return parameter_set(self.param_set)


def derive_seed(seed: int, label: str) -> int:
    """Independent 64-bit seed for a labelled consumer of a session seed."""
    digest = hashlib.sha256(f"{seed}/{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def run_campaign(config: CampaignConfig, victim: VictimWrapper, keypair: KeyPair) -> Corpus:
    """Drive ``victim`` through ``config.count`` start/init/check/stop cycles."""
    params = config.validate()
    msg_rng = random.Random(derive_seed(config.seed, "messages"))
    corpus = Corpus(params.name, keypair.pk_seed, keypair.pk_root)
    for i in range(config.count):
        if config.message_policy == FIXED:
            message = config.message
        else:
            message = msg_rng.randbytes(16)
        try:
            victim.start()
            victim.init(message)
            record = victim.check()
            victim.stop()
        except Exception:
            log.exception("victim failed in cycle %d; corpus marked incomplete", i)
            corpus.complete = False
            break
        corpus.records.append(record)
    return corpus


def simulated_campaign(config: CampaignConfig, keypair: KeyPair) -> Corpus:
    params = config.validate()
    victim = SimulatedSigner(params, keypair, config.mode, config.fault, derive_seed(config.seed, "victim"))
    return run_campaign(config, victim, keypair)


# ---------------------------------------------------------------------------
# corpus files: one JSON object per line, header first


def record_to_dict(params: ParameterSet, record: SignatureRecord) -> dict:
    row = {
        "param_set": params.name,
        "mode": record.mode,
        "msg_hex": record.message.hex(),
        "r_hex": record.signature.randomizer.hex(),
        "sig_hex": encode_signature(params, record.signature).hex(),
    }
    if record.fault_ground_truth is not None:
        row["fault"] = str(record.fault_ground_truth)
    return row


def corpus_lines(corpus: Corpus) -> list[str]:
    params = corpus.params
    header = {
        "kind": "corpus",
        "param_set": params.name,
        "pk_seed_hex": corpus.pk_seed.hex(),
        "pk_root_hex": corpus.pk_root.hex(),
        "count": len(corpus.records),
        "complete": corpus.complete,
    }
    lines = [json.dumps(header)]
    lines += [json.dumps(record_to_dict(params, r)) for r in corpus.records]
    return lines


def save_corpus(corpus: Corpus, sink) -> None:
    """Write ``corpus`` to a path or text stream."""
    text = "\n".join(corpus_lines(corpus)) + "\n"
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        Path(sink).write_text(text)


def _unhex(row, key, ordinal):
    try:
        return bytes.fromhex(row[key])
    except (KeyError, TypeError, ValueError):
        raise FormatError(f"record {ordinal}: bad or missing {key}") from None


def load_corpus(source) -> Corpus:
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty corpus file")
    try:
        header = json.loads(lines[0])
        params = parameter_set(header["param_set"])
        pk_seed = bytes.fromhex(header["pk_seed_hex"])
        pk_root = bytes.fromhex(header["pk_root_hex"])
        count = int(header["count"])
    except Exception as exc:
        raise FormatError(f"bad corpus header: {exc}") from None
    if header.get("kind") != "corpus" or len(pk_seed) != params.n or len(pk_root) != params.n:
        raise FormatError("bad corpus header")
    records = []
    for ordinal, line in enumerate(lines[1:]):
        try:
            row = json.loads(line)
        except json.JSONDecodeError:
            raise FormatError(f"record {ordinal}: not valid JSON") from None
        if not isinstance(row, dict):
            raise FormatError(f"record {ordinal}: not a key-value map")
        if row.get("param_set") != params.name:
            raise FormatError(f"record {ordinal}: parameter set {row.get('param_set')!r} != {params.name!r}")
        if row.get("mode") not in MODES:
            raise FormatError(f"record {ordinal}: bad mode")
        message = _unhex(row, "msg_hex", ordinal)
        r = _unhex(row, "r_hex", ordinal)
        try:
            sig = decode_signature(params, _unhex(row, "sig_hex", ordinal))
        except FormatError as exc:
            raise FormatError(f"record {ordinal}: {exc}") from None
        if sig.randomizer != r:
            raise FormatError(f"record {ordinal}: r_hex disagrees with signature")
        fault = None
        if "fault" in row:
            try:
                fault = FaultEvent.parse(row["fault"])
            except (ValueError, AttributeError):
                raise FormatError(f"record {ordinal}: bad fault field") from None
        records.append(SignatureRecord(message, sig, row["mode"], fault))
    if len(records) != count:
        raise FormatError(f"header announces {count} records, file holds {len(records)}")
    return Corpus(params.name, pk_seed, pk_root, records, bool(header.get("complete", True)))


def strip_ground_truth(corpus: Corpus) -> Corpus:
    """Copy of ``corpus`` without fault metadata, as an attacker would see it."""
    return replace(corpus, records=[replace(r, fault_ground_truth=None) for r in corpus.records])
