"""Exact grafting success probability and attack cost for concrete instances.

A random candidate root is signable when each of its message digits reaches
the minimal exposed position of its chain and its checksum digits do the
same.  Instead of enumerating all w^ell1 messages, enumerate the reachable
checksum tuples and count, per tuple, the bounded weak compositions of the
remaining advancement over the message chains.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyReport, TooLarge
from .params import ParameterSet


def _positions(instance) -> tuple[int, ...]:
    return tuple(getattr(instance, "exposed_min", instance))


@dataclass(frozen=True)
class ChainCapacities:
    k: tuple[int, ...]  # w-1-min position, message chains
    checksum_min: tuple[int, ...]  # minimal exposed checksum digits, most significant first

    @property
    def total(self) -> int:
        return sum(self.k)


def capacities(instance, params: ParameterSet) -> ChainCapacities:
    pos = _positions(instance)
    if len(pos) != params.ell:
        raise ValueError(f"expected {params.ell} positions, got {len(pos)}")
    return ChainCapacities(
        tuple(params.w - 1 - m for m in pos[: params.ell1]),
        tuple(pos[params.ell1 :]),
    )


def checksum_value(tau: Sequence[int], w: int) -> int:
    """Integer value of a checksum tuple, first digit most significant."""
    v = 0
    for d in tau:
        v = v * w + d
    return v


def kappa(tau: Sequence[int], caps: ChainCapacities, w: int) -> int:
    """Advancement left to spread over the message chains once the checksum is ``tau``."""
    return caps.total - checksum_value(tau, w)


def enumerate_checksums(caps: ChainCapacities, params: ParameterSet, feasible_only: bool = True) -> list[tuple[int, ...]]:
    w = params.w
    max_checksum = params.ell1 * (w - 1)
    out = []
    for tau in itertools.product(*(range(c, w) for c in caps.checksum_min)):
        if checksum_value(tau, w) > max_checksum:
            continue
        if feasible_only and kappa(tau, caps, w) < 0:
            continue
        out.append(tau)
    return out


def weak_comp_table(max_sum: int, bounds: Sequence[int]) -> list[int]:
    """Counts of bounded weak compositions for every target 0..max_sum.

    Sliding-window prefix sums, O(max_sum * len(bounds)) time, O(max_sum) memory.
    """
    dp = [0] * (max_sum + 1)
    dp[0] = 1
    for k in bounds:
        new = [0] * (max_sum + 1)
        prefix = 0
        for t in range(max_sum + 1):
            prefix += dp[t]
            if t > k:
                prefix -= dp[t - (k + 1)]
            new[t] = prefix
        dp = new
    return dp


def weak_comp(tau_sum: int, bounds: Sequence[int]) -> int:
    """Number of x with sum(x) == tau_sum and 0 <= x_i <= bounds[i]."""
    if tau_sum < 0:
        return 0
    return weak_comp_table(tau_sum, bounds)[tau_sum]


def signable_count(instance, params: ParameterSet) -> int:
    """Number of signable message digit vectors out of w^ell1."""
    caps = capacities(instance, params)
    taus = enumerate_checksums(caps, params)
    if not taus:
        return 0
    table = weak_comp_table(caps.total, caps.k)
    return sum(table[kappa(tau, caps, params.w)] for tau in taus)


def p_signable(instance, params: ParameterSet) -> Fraction:
    return Fraction(signable_count(instance, params), params.w**params.ell1)


def brute_force_p_signable(instance, params: ParameterSet, chunk: int = 1 << 20) -> Fraction:
    """Enumerate every message digit vector; reference oracle for toy scale."""
    w, ell1, ell2 = params.w, params.ell1, params.ell2
    total = w**ell1
    if total > 1 << 24:
        raise TooLarge(f"w^ell1 = 2^{math.log2(total):.0f} messages")
    pos = np.array(_positions(instance), dtype=np.int64)
    msg_min, csum_min = pos[:ell1], pos[ell1:]
    count = 0
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        digits = np.stack([(idx // w ** (ell1 - 1 - j)) % w for j in range(ell1)], axis=1)
        ok = np.all(digits >= msg_min, axis=1)
        csum = np.sum(w - 1 - digits, axis=1)
        for j in range(ell2):
            ok &= (csum // w ** (ell2 - 1 - j)) % w >= csum_min[j]
        count += int(np.count_nonzero(ok))
    return Fraction(count, total)


def hashes_per_tree(params: ParameterSet) -> int:
    """Hash calls to build one XMSS tree: per leaf ell PRF + ell(w-1) chain steps + 1 compression, plus inner nodes."""
    leaves = params.leaves_per_tree
    return leaves * (params.ell * (params.w - 1) + params.ell + 1) + (leaves - 1)


def grafting_cost(instance, params: ParameterSet, per_tree: Optional[int] = None) -> tuple[Fraction, Fraction]:
    """Expected (attempts, hash calls) until a random grafted tree is signable."""
    p = p_signable(instance, params)
    if p == 0:
        raise ZeroDivisionError("instance admits no signable root")
    attempts = 1 / p
    return attempts, attempts * (per_tree or hashes_per_tree(params))


def seeking_cost(wots_layer: int, params: ParameterSet) -> int:
    return 1 << params.seeking_exponent(wots_layer)


def log2(x) -> float:
    x = Fraction(x)
    return math.log2(x.numerator) - math.log2(x.denominator)


@dataclass(frozen=True)
class ReportRow:
    instance: object
    layer: int
    p_signable: Fraction
    attempts: Fraction
    grafting_hashes: Fraction
    seeking_hashes: int
    identification_hashes: int = 0

    @property
    def total(self) -> Fraction:
        return self.grafting_hashes + self.seeking_hashes

    @property
    def log2_grafting(self) -> float:
        return log2(self.grafting_hashes)

    @property
    def log2_seeking(self) -> float:
        return log2(self.seeking_hashes)

    @property
    def log2_total(self) -> float:
        return log2(self.total)

    def to_dict(self) -> dict:
        address = getattr(self.instance, "address", None)
        return {
            "kind": "instance",
            "address": str(address) if address is not None else "",
            "layer": self.layer,
            "p_signable": f"{self.p_signable.numerator}/{self.p_signable.denominator}",
            "attempts": float(self.attempts),
            "log2_grafting": round(self.log2_grafting, 4),
            "log2_seeking": round(self.log2_seeking, 4),
            "log2_total": round(self.log2_total, 4),
            "identification_hashes": self.identification_hashes,
        }


@dataclass
class ComplexityReport:
    param_set: str
    hashes_per_tree: int
    rows: list[ReportRow]

    def render(self) -> str:
        header = ("Rank", "Instance", "Layer", "Grafting (log2)", "Seeking (log2)", "P(Signable)", "Total (log2)")
        body = []
        for rank, row in enumerate(self.rows):
            address = getattr(row.instance, "address", "-")
            body.append(
                (
                    str(rank),
                    str(address),
                    str(row.layer),
                    f"{row.log2_grafting:.2f}",
                    f"{row.log2_seeking:.2f}",
                    f"2^{log2(row.p_signable):.2f}",
                    f"{row.log2_total:.2f}",
                )
            )
        widths = [max(len(r[c]) for r in [header, *body]) for c in range(len(header))]
        lines = [" | ".join(h.ljust(wd) for h, wd in zip(header, widths))]
        lines.append("-+-".join("-" * wd for wd in widths))
        lines += [" | ".join(v.rjust(wd) for v, wd in zip(r, widths)) for r in body]
        lines.append(f"{self.param_set}: {self.hashes_per_tree} hashes per XMSS tree")
        return "\n".join(lines)


def rank_instances(instances, params: ParameterSet, per_tree: Optional[int] = None) -> ComplexityReport:
    """Order compromised instances by one-shot forgery cost (grafting + seeking)."""
    per_tree = per_tree or hashes_per_tree(params)
    rows = []
    for inst in instances:
        p = p_signable(inst, params)
        if p == 0:
            continue
        attempts = 1 / p
        layer = inst.address.layer
        rows.append(
            ReportRow(
                instance=inst,
                layer=layer,
                p_signable=p,
                attempts=attempts,
                grafting_hashes=attempts * per_tree,
                seeking_hashes=seeking_cost(layer, params),
                identification_hashes=getattr(inst, "identification_hashes", 0),
            )
        )
    if not rows:
        raise EmptyReport("no compromised instance to rank")
    rows.sort(key=lambda r: (r.total, r.layer))
    return ComplexityReport(params.name, per_tree, rows)
