"""The eight acceptance criteria, each printing one PASS/FAIL line."""

import random
import statistics
import time
from fractions import Fraction

import pytest

import oracles
from conftest import ACCEPTANCE_LINES
from helpers import differing_parts, inconsistent_layers
from slhfault.complexity import brute_force_p_signable, grafting_cost, hashes_per_tree, log2, p_signable, seeking_cost, weak_comp
from slhfault.core import Adrs, digest_split, slh_keygen, slh_sign, slh_verify, wots_digits, xmss_sign
from slhfault.fault import CampaignConfig, FaultSpec, Trigger, derive_seed, simulated_campaign, strip_ground_truth
from slhfault.forgery import (
    InstanceAddress,
    WotsObservation,
    extract_observations,
    find_compromised,
    forge,
    graft_search,
    identify_secrets,
    path_seek,
)
from slhfault.params import STANDARD_NAMES, parameter_set

W4 = parameter_set("toy-w4")
TOY = parameter_set("toy-e2e")


class Criterion:
    def __init__(self, number, title, limit=None):
        self.number, self.title, self.limit = number, title, limit

    def __enter__(self):
        self.start = time.perf_counter()
        self.detail = ""
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        ok = exc_type is None and (self.limit is None or elapsed < self.limit)
        limit = f" < {self.limit:g}s" if self.limit else ""
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {self.number}: {self.title} ({elapsed:.2f}s{limit}) {self.detail}".rstrip()
        print(line)
        ACCEPTANCE_LINES.append(line)
        if exc_type is None and not ok:
            pytest.fail(f"criterion {self.number} took {elapsed:.1f}s, limit {self.limit}s")
        return False


def test_1_weak_comp_matches_enumeration():
    rng = random.Random(1)
    with Criterion(1, "weak_comp == exhaustive enumeration", 10) as c:
        cases = 0
        while cases < 1000:
            ell1 = rng.randint(1, 6)
            bounds = [rng.randint(0, 4) for _ in range(ell1)]
            total = rng.randint(0, 12)
            assert weak_comp(total, bounds) == oracles.compositions(total, bounds), (total, bounds)
            cases += 1
        c.detail = f"{cases} cases"


def test_2_p_signable_matches_brute_force():
    rng = random.Random(2)
    with Criterion(2, "p_signable == brute-force oracle", 60) as c:
        assert p_signable((1, 0, 2, 3, 1, 2), W4) == brute_force_p_signable((1, 0, 2, 3, 1, 2), W4) == Fraction(1, 256)
        assert p_signable((1, 0, 2, 3, 1, 1), W4) == brute_force_p_signable((1, 0, 2, 3, 1, 1), W4) == Fraction(4, 256)
        cases = 2
        for k in range(200):
            params = W4 if k % 2 else TOY
            mins = tuple(rng.randrange(params.w) for _ in range(params.ell))
            assert p_signable(mins, params) == brute_force_p_signable(mins, params), (params.name, mins)
            cases += 1
        c.detail = f"{cases} instances"


def test_3_seeking_exponents():
    with Criterion(3, "closed-form seeking exponents") as c:
        table = [("SHA2-128f", 21, 3), ("SHA2-128f", 15, 21), ("SHA2-256f", 16, 4), ("SHA2-192f", 13, 27)]
        for name, layer, e in table:
            assert seeking_cost(layer, parameter_set(name)) == 2**e, (name, layer)
        c.detail = ", ".join(f"{n} L{l} -> 2^{e}" for n, l, e in table)


def test_4_end_to_end_forgery():
    with Criterion(4, "toy-e2e universal forgery with graft reuse", 120) as c:
        victim = slh_keygen(TOY, b"acceptance-4")
        cfg = CampaignConfig("toy-e2e", mode="det", fault=FaultSpec(0), count=16, seed=44)
        full = simulated_campaign(cfg, victim)
        assert sum(r.fault_ground_truth is not None for r in full.records) >= 16
        corpus = strip_ground_truth(full)
        seed = 2024
        instances = [i for i in find_compromised(extract_observations(corpus), TOY, corpus.pk_seed) if i.layer >= 1]
        assert instances
        inst = instances[0]
        graft = graft_search(TOY, corpus.pk_seed, inst, derive_seed(seed, "graft"))
        forged = []
        for k, message in enumerate([b"forged-by-slash", b"a second attacker message"]):
            seek = path_seek(TOY, corpus.pk_seed, corpus.pk_root, message, graft.index, inst.layer, derive_seed(seed, f"seek/{k}"))
            sig = forge(TOY, corpus.pk_seed, corpus.pk_root, message, inst, graft, seek)
            assert slh_verify(TOY, message, sig, victim.pk_seed, victim.pk_root)
            forged.append(sig)
        # same seed, same forgery
        again = forge(
            TOY, corpus.pk_seed, corpus.pk_root, b"forged-by-slash", inst, graft_search(TOY, corpus.pk_seed, inst, derive_seed(seed, "graft")),
            path_seek(TOY, corpus.pk_seed, corpus.pk_root, b"forged-by-slash", graft.index, inst.layer, derive_seed(seed, "seek/0")),
        )
        assert again == forged[0]
        c.detail = f"instance {inst.address}, graft attempts {graft.attempts}"


def test_5_fault_model_invariants():
    with Criterion(5, "fault rejection and localization over 200 records", 60) as c:
        victim = slh_keygen(TOY, b"acceptance-5")
        fired = clean = 0
        for layer, mode in ((0, "det"), (1, "det"), (0, "rand"), (1, "rand")):
            spec = FaultSpec(layer, trigger=Trigger.parse("prob=0.6"))
            corpus = simulated_campaign(CampaignConfig("toy-e2e", mode=mode, message_policy="random", fault=spec, count=50, seed=layer), victim)
            for r in corpus.records:
                ok = slh_verify(TOY, r.message, r.signature, victim.pk_seed, victim.pk_root)
                if r.fault_ground_truth is None:
                    assert ok
                    clean += 1
                    continue
                fired += 1
                assert not ok
                assert inconsistent_layers(TOY, r, victim) == [layer + 1]
                if mode == "det":
                    assert differing_parts(TOY, r, victim) == [f"wots{layer + 1}"]
        assert fired + clean == 200 and fired and clean
        c.detail = f"{fired} faulted, {clean} clean"


def test_6_statistical_laws():
    with Criterion(6, "graft and seek attempt means", 300) as c:
        victim = slh_keygen(TOY, b"acceptance-6")
        corpus = simulated_campaign(CampaignConfig("toy-e2e", fault=FaultSpec(1), count=2, seed=0), victim)
        (inst,) = find_compromised(extract_observations(strip_ground_truth(corpus)), TOY, victim.pk_seed)
        p = p_signable(inst, TOY)
        assert Fraction(1, 512) <= p <= Fraction(1, 16)
        mean = statistics.mean(graft_search(TOY, victim.pk_seed, inst, seed=s).attempts for s in range(100))
        expected = float(1 / p)
        assert expected / 2 <= mean <= expected * 2, (mean, expected)
        parts = [f"graft mean {mean:.1f} vs 1/P {expected:.1f}"]

        for name, layer in (("toy-e2e", 2), ("toy-e2e", 1), ("SHA2-128f", 20), ("SHA2-128f", 19)):
            params = parameter_set(name)
            e = params.seeking_exponent(layer)
            assert e <= 10
            key = slh_keygen(params, b"acceptance-6") if params is TOY else victim
            pk_seed, pk_root = (b"\x11" * params.n, b"\x22" * params.n) if params is not TOY else (key.pk_seed, key.pk_root)
            rng = random.Random(e)
            runs = [
                path_seek(params, pk_seed, pk_root, b"m", rng.randrange(1 << e), layer, seed=s).attempts
                for s in range(100)
            ]
            m = statistics.mean(runs)
            assert 2**e / 2 <= m <= 2**e * 2, (name, layer, m)
            parts.append(f"seek 2^{e}: {m:.1f}")
        c.detail = "; ".join(parts)


def test_7_scheme_correctness():
    with Criterion(7, "sign/verify on all standard and toy sets", 300) as c:
        for name in STANDARD_NAMES:
            params = parameter_set(name)
            key = slh_keygen(params, name.encode())
            sig = slh_sign(params, b"acceptance", key, "det")
            assert slh_verify(params, b"acceptance", sig, key.pk_seed, key.pk_root), name
            assert not slh_verify(params, b"acceptance!", sig, key.pk_seed, key.pk_root), name
            if name.endswith("f"):
                assert slh_sign(params, b"acceptance", key, "det") == sig
        for params in (W4, TOY):
            key = slh_keygen(params, b"exhaustive")
            paths = set()
            for v in range(256):
                message = bytes([v])
                for mode in ("det", "rand"):
                    sig = slh_sign(params, message, key, mode)
                    assert slh_verify(params, message, sig, key.pk_seed, key.pk_root)
                    split = digest_split(params, sig.randomizer, key.pk_seed, key.pk_root, message)
                    paths.add(split.full_index(params))
                assert slh_sign(params, message, key, "det") == slh_sign(params, message, key, "det")
            if params is W4:
                assert paths == set(range(1 << params.h))
        c.detail = f"{len(STANDARD_NAMES)} standard sets, 2x256 messages per toy set"


def _synthetic_group(params, count, seed):
    """``count`` WOTS+ signatures of one 128f key pair on random values."""
    rng = random.Random(seed)
    sk, pk = rng.randbytes(params.n), rng.randbytes(params.n)
    address = InstanceAddress(params.d - 1, 0, 3)
    adrs = Adrs.at(address.layer, 0)
    group = []
    for k in range(count):
        value = rng.randbytes(params.n)
        sig = xmss_sign(params, value, sk, pk, address.keypair, adrs)
        group.append(
            WotsObservation(address, value, sig.wots_sig, sig.auth_path, tuple(wots_digits(params, value)), b"", k, (), authentic=True)
        )
    return pk, group


def test_8_plausibility_band():
    with Criterion(8, "128f grafting cost inside 2^12.58..2^52.92", 10) as c:
        params = parameter_set("SHA2-128f")
        bits = {}
        for count in (2, 32):
            pk, group = _synthetic_group(params, count, seed=count)
            inst = identify_secrets(params, pk, group)
            bits[count] = log2(grafting_cost(inst, params)[1])
        c.detail = ", ".join(f"{k} sigs: 2^{v:.2f}" for k, v in bits.items())
        c.detail += f" (one tree alone costs 2^{log2(hashes_per_tree(params)):.2f})"
        for count, value in bits.items():
            assert 12.58 <= value <= 52.92, (count, value)
