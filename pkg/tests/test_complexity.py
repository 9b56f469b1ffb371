import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from slhfault.complexity import (
    ChainCapacities,
    brute_force_p_signable,
    capacities,
    checksum_value,
    enumerate_checksums,
    grafting_cost,
    hashes_per_tree,
    kappa,
    log2,
    p_signable,
    rank_instances,
    seeking_cost,
    weak_comp,
    weak_comp_table,
)
from slhfault.errors import EmptyReport, TooLarge
from slhfault.forgery import CompromisedInstance, InstanceAddress
from slhfault.params import parameter_set

W4 = parameter_set("toy-w4")
TOY = parameter_set("toy-e2e")


def instance(mins, layer=1, tree=0, keypair=0):
    return CompromisedInstance(InstanceAddress(layer, tree, keypair), tuple(mins), (), (), (), 2, 2)


def test_capacities():
    caps = capacities((1, 0, 2, 3, 1, 1), W4)
    assert caps.k == (2, 3, 1, 0) and caps.checksum_min == (1, 1)
    assert caps.total == 6 == checksum_value((1, 2), 4)
    assert capacities((3,) * 6, W4).k == (0,) * 4
    assert capacities((0,) * 6, W4).k == (3,) * 4
    with pytest.raises(ValueError):
        capacities((0,) * 5, W4)


def test_enumerate_checksums_worked_case():
    caps = ChainCapacities((2, 3, 1, 0), (1, 1))
    assert enumerate_checksums(caps, W4) == [(1, 1), (1, 2)]
    assert enumerate_checksums(caps, W4, feasible_only=False) == [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)]
    full = ChainCapacities((3, 3, 3, 3), (0, 0))
    assert len(enumerate_checksums(full, W4)) == 13
    assert enumerate_checksums(ChainCapacities((3, 3, 3, 3), (3, 3)), W4) == []


def test_kappa():
    caps = ChainCapacities((2, 3, 1, 0), (1, 1))
    assert kappa((1, 2), caps, 4) == 0
    assert kappa((1, 1), caps, 4) == 1
    assert kappa((2, 1), caps, 4) < 0
    # digit order is explicit: (2, 1) and (1, 2) are different values
    assert checksum_value((2, 1), 4) == 9 and checksum_value((1, 2), 4) == 6


def test_weak_comp_examples():
    assert weak_comp(0, (3, 1, 2)) == 1
    assert weak_comp(2, (1, 1, 1)) == 3
    assert weak_comp(3, (3, 3, 3, 3)) == 20
    assert weak_comp(-1, (3,)) == 0
    assert weak_comp(5, ()) == 0 and weak_comp(0, ()) == 1


def test_weak_comp_big_counts():
    # 64 chains of capacity 15 spread over half the range: exceeds 64 bits
    n = weak_comp(480, (15,) * 64)
    assert n > 2**64
    assert n == max(weak_comp_table(960, (15,) * 64))


@given(st.integers(0, 12), st.lists(st.integers(0, 5), min_size=1, max_size=6))
@settings(max_examples=200)
def test_weak_comp_matches_enumeration(total, bounds):
    assert weak_comp(total, bounds) == oracles.compositions(total, bounds)


@given(st.lists(st.integers(0, 6), min_size=1, max_size=6), st.integers(0, 20), st.randoms())
def test_weak_comp_symmetric(bounds, total, rnd):
    shuffled = list(bounds)
    rnd.shuffle(shuffled)
    assert weak_comp(total, bounds) == weak_comp(total, shuffled)


def test_worked_probabilities():
    assert p_signable((1, 0, 2, 3, 1, 2), W4) == Fraction(1, 256)
    assert p_signable((1, 0, 2, 3, 1, 1), W4) == Fraction(4, 256)
    assert oracles.signable_fraction(W4, (1, 0, 2, 3, 1, 1)) == Fraction(4, 256)
    assert p_signable((0,) * 6, W4) == 1
    assert p_signable((0,) * 11, TOY) == 1
    assert grafting_cost((1, 0, 2, 3, 1, 1), W4)[0] == 64


def test_full_exposure_counts_every_message():
    caps = ChainCapacities((3,) * 4, (0, 0))
    table = weak_comp_table(caps.total, caps.k)
    assert sum(table[kappa(t, caps, 4)] for t in enumerate_checksums(caps, W4)) == 4**4


def test_zero_probability():
    assert p_signable((3, 3, 3, 3, 3, 3), W4) == 0
    with pytest.raises(ZeroDivisionError):
        grafting_cost((3,) * 6, W4)


def random_mins(params, rng):
    return tuple(rng.randrange(params.w) for _ in range(params.ell1)) + tuple(rng.randrange(params.w) for _ in range(params.ell2))


@pytest.mark.parametrize("params", [W4, TOY], ids=lambda p: p.name)
def test_brute_force_agrees_with_independent_oracle(params):
    rng = random.Random(5)
    for _ in range(5 if params is TOY else 40):
        mins = random_mins(params, rng)
        assert brute_force_p_signable(mins, params) == oracles.signable_fraction(params, mins) == p_signable(mins, params)


def test_brute_force_guard():
    with pytest.raises(TooLarge):
        brute_force_p_signable((0,) * 35, parameter_set("SHA2-128f"))


mins_w4 = st.tuples(*[st.integers(0, 3)] * 6)


@given(mins_w4, st.integers(0, 5))
@settings(max_examples=200)
def test_monotone_under_more_exposure(mins, i):
    lower = list(mins)
    lower[i] = max(0, lower[i] - 1)
    assert p_signable(tuple(lower), W4) >= p_signable(mins, W4)


@given(mins_w4, st.permutations(range(4)))
def test_message_chain_symmetry(mins, perm):
    permuted = tuple(mins[j] for j in perm) + mins[4:]
    assert p_signable(permuted, W4) == p_signable(mins, W4)


def test_hashes_per_tree_formula():
    assert hashes_per_tree(TOY) == 4 * (11 * 3 + 11 + 1) + 3 == 183
    p = parameter_set("SHA2-128f")
    assert hashes_per_tree(p) == 8 * (35 * 15 + 35 + 1) + 7


@pytest.mark.parametrize(
    "name,layer,exponent",
    [("SHA2-128f", 21, 3), ("SHA2-128f", 15, 21), ("SHA2-256f", 16, 4), ("SHA2-192f", 13, 27)],
)
def test_seeking_exponents(name, layer, exponent):
    p = parameter_set(name)
    assert seeking_cost(layer, p) == 2**exponent
    assert p.seeking_exponent(layer) == exponent


def test_log2_exact():
    assert log2(Fraction(1, 256)) == -8
    assert math.isclose(log2(Fraction(3, 1)), math.log2(3))


def test_rank_instances():
    a = instance((1, 0, 2, 3, 1, 1), layer=1)
    b = instance((1, 0, 2, 3, 1, 1), layer=0)
    full = instance((3,) * 6, layer=1)
    report = rank_instances([a, b, full], W4)
    assert [r.layer for r in report.rows] == [1, 0]
    row = report.rows[0]
    assert row.total == row.grafting_hashes + row.seeking_hashes
    assert row.attempts == 64
    totals = [r.log2_total for r in report.rows]
    assert totals == sorted(totals)
    text = report.render()
    for col in ("Layer", "Grafting (log2)", "Seeking (log2)", "P(Signable)", "Total (log2)"):
        assert col in text
    assert len({len(line) for line in text.splitlines()[:-1]}) == 1
    with pytest.raises(EmptyReport):
        rank_instances([full], W4)
    with pytest.raises(EmptyReport):
        rank_instances([], W4)
