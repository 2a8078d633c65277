"""Exact parity DNFs and the block-OR parity approximator.

Split the coordinates into b blocks and OR together each block's exact
parity DNF. Odd total parity forces some block to be odd, so the error is
one-sided: it is the chance that an even, nonzero number of blocks are odd,
1/2 - 2^-b.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .boolfn import check_arity
from .dnf import Dnf, Term, union


@dataclass(frozen=True)
class BlockPartition:
    n: int
    blocks: tuple[tuple[int, ...], ...]  # 1-based coordinates

    @property
    def b(self) -> int:
        return len(self.blocks)


def block_partition(n: int, b: int) -> BlockPartition:
    """Contiguous balanced blocks; the first n mod b blocks get one extra coordinate."""
    check_arity(n)
    if not 1 <= b <= n:
        raise ValueError(f"block count must lie in [1, {n}], got {b}")
    q, r = divmod(n, b)
    blocks, start = [], 1
    for j in range(b):
        size = q + (1 if j < r else 0)
        blocks.append(tuple(range(start, start + size)))
        start += size
    return BlockPartition(n, tuple(blocks))


def parity_trivial_dnf(n: int, coords: Sequence[int]) -> Dnf:
    """All odd-weight patterns on ``coords``: 2^(m-1) terms of width m."""
    check_arity(n)
    coords = sorted(set(coords))
    if not coords:
        raise ValueError("parity DNF needs at least one coordinate")
    if coords[0] < 1 or coords[-1] > n:
        raise ValueError(f"coordinates must lie in [1, {n}]")
    mask = sum(1 << (c - 1) for c in coords)
    terms = []
    for pattern in product((0, 1), repeat=len(coords)):
        if sum(pattern) % 2:
            values = sum(bit << (c - 1) for bit, c in zip(pattern, coords))
            terms.append(Term(n, mask, values))
    return Dnf(n, terms)


def parity_block_approx(n: int, b: int) -> Dnf:
    part = block_partition(n, b)
    return union(n, (parity_trivial_dnf(n, blk) for blk in part.blocks))


def block_error(b: int) -> Fraction:
    if b < 1:
        raise ValueError(f"block count must be >= 1, got {b}")
    return Fraction(1, 2) - Fraction(1, 2 ** b)


def blocks_for_epsilon(epsilon: float) -> int:
    """b = round(log2(1 / (1/2 - eps))) for eps in (0, 1/2)."""
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    return max(1, round(math.log2(1.0 / (0.5 - epsilon))))


def theorem_size_bound(n: int, epsilon: float) -> float:
    """2^((1 - 2 eps) n): the claimed size (and, dividing the exponent, width)."""
    return 2.0 ** ((1.0 - 2.0 * epsilon) * n)
