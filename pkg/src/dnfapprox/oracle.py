"""Brute-force verifiers.

Nothing here calls into the fast evaluation paths of ``dnf``; the point of
this module is to catch bugs in them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable

import numpy as np

from .boolfn import BitString, Point, TruthTable, check_arity
from .dnf import Dnf, Term
from .seeding import make_rng

EXHAUSTIVE_CAP = 20
DEFAULT_SAMPLES = 38416


@dataclass(frozen=True)
class ErrorEstimate:
    estimate: float
    method: str
    samples: int
    half_width: float

    def __post_init__(self):
        if self.method not in ("exhaustive", "monte_carlo"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "exhaustive" and self.half_width != 0:
            raise ValueError("exhaustive estimates carry no half-width")


def _coords(x: Point, n: int) -> tuple[int, ...]:
    if isinstance(x, BitString):
        if x.n != n:
            raise ValueError(f"arity mismatch: input has n={x.n}, expected {n}")
        return x.bits
    if not 0 <= x < 1 << n:
        raise ValueError(f"index {x} out of range for n={n}")
    return tuple((x >> i) & 1 for i in range(n))


def _literals(t: Term) -> list[tuple[int, int]]:
    return [(i, (t.values >> i) & 1) for i in range(t.n) if (t.mask >> i) & 1]


def slow_eval(D: Dnf, x: Point) -> bool:
    """Term-by-term, literal-by-literal scan."""
    bits = _coords(x, D.n)
    for t in D.terms:
        if all(bits[i] == want for i, want in _literals(t)):
            return True
    return False


def slow_table(D: Dnf) -> list[bool]:
    check_arity(D.n, EXHAUSTIVE_CAP)
    lits = [_literals(t) for t in D.terms]
    out = []
    for bits in product((0, 1), repeat=D.n):
        x = bits[::-1]  # product varies the last slot fastest; coordinate 1 is the low bit
        out.append(any(all(x[i] == want for i, want in lit) for lit in lits))
    return out


def exact_error(D: Dnf, T: TruthTable, cap: int = EXHAUSTIVE_CAP) -> ErrorEstimate:
    if D.n != T.n:
        raise ValueError(f"arity mismatch: {D.n} vs {T.n}")
    if T.n > cap:
        raise ValueError(f"n={T.n} exceeds exhaustive cap {cap}; use mc_error")
    wrong = sum(1 for i, v in enumerate(slow_table(D)) if v != bool(T.bits[i]))
    return ErrorEstimate(wrong / (1 << T.n), "exhaustive", 1 << T.n, 0.0)


def half_width(p: float, samples: int) -> float:
    return 1.96 * math.sqrt(p * (1.0 - p) / samples)


def mc_error(D: Dnf, f_eval: Callable[[int], bool], samples: int = DEFAULT_SAMPLES,
             seed: int = 0) -> ErrorEstimate:
    """Estimate Pr_x[D(x) != f(x)] from a uniform sample of distinct inputs.

    ``f_eval`` takes a table index. Points are drawn without replacement; when
    ``samples >= 2**n`` every input is visited once.
    """
    if samples < 100:
        raise ValueError("mc_error needs at least 100 samples")
    space = 1 << D.n
    rng = make_rng(seed)
    if samples >= space:
        xs = np.arange(space, dtype=np.int64)
    else:
        xs = rng.choice(space, size=samples, replace=False).astype(np.int64)
    lits = [_literals(t) for t in D.terms]
    wrong = 0
    for x in xs:
        x = int(x)
        got = any(all(((x >> i) & 1) == want for i, want in lit) for lit in lits)
        wrong += got != bool(f_eval(x))
    p = wrong / xs.size
    return ErrorEstimate(p, "monte_carlo", int(xs.size), half_width(p, int(xs.size)))


def random_dnf(n: int, terms: int, rng: np.random.Generator) -> Dnf:
    """Test corpus generator: each term fixes each coordinate w.p. 1/2, random values."""
    check_arity(n)
    masks = []
    values = []
    for _ in range(terms):
        m = int(rng.integers(0, 1 << n))
        masks.append(m)
        values.append(int(rng.integers(0, 1 << n)) & m)
    return Dnf.from_arrays(n, masks, values)


# -- exact minimum DNF (n <= 4) ---------------------------------------------

MIN_DNF_CAP = 4


def _cube_points(n: int, mask: int, values: int) -> frozenset[int]:
    free = [i for i in range(n) if not (mask >> i) & 1]
    pts = []
    for combo in product((0, 1), repeat=len(free)):
        p = values
        for i, b in zip(free, combo):
            p |= b << i
        pts.append(p)
    return frozenset(pts)


def prime_implicants(T: TruthTable) -> list[tuple[int, int, frozenset[int]]]:
    """All maximal sub-cubes inside T^{-1}(1), as (mask, values, points)."""
    n = T.n
    on = {i for i in range(1 << n) if T.bits[i]}
    implicants = []
    for mask in range(1 << n):
        for values in range(1 << n):
            if values & ~mask:
                continue
            pts = _cube_points(n, mask, values)
            if pts <= on:
                implicants.append((mask, values, pts))
    primes = []
    for m, v, pts in implicants:
        # prime iff freeing any fixed coordinate leaves the on-set
        maximal = True
        for i in range(n):
            if (m >> i) & 1 and _cube_points(n, m & ~(1 << i), v & ~(1 << i)) <= on:
                maximal = False
                break
        if maximal:
            primes.append((m, v, pts))
    return primes


def exact_min_dnf(T: TruthTable) -> Dnf:
    """Minimum-size DNF computing T exactly, by exhaustive prime-implicant cover."""
    if T.n > MIN_DNF_CAP:
        raise ValueError(f"exact_min_dnf supports n <= {MIN_DNF_CAP}, got {T.n}")
    n = T.n
    primes = prime_implicants(T)
    on = frozenset(i for i in range(1 << n) if T.bits[i])
    best: list[list[int]] = [list(range(len(primes)))]

    def search(uncovered: frozenset[int], chosen: list[int]):
        if len(chosen) >= len(best[0]):
            return
        if not uncovered:
            best[0] = list(chosen)
            return
        # branch on the point with fewest covering primes
        point = min(uncovered, key=lambda p: sum(p in pr[2] for pr in primes))
        for j, pr in enumerate(primes):
            if point in pr[2]:
                chosen.append(j)
                search(uncovered - pr[2], chosen)
                chosen.pop()

    if on:
        search(on, [])
        picked = sorted(best[0])
    else:
        picked = []
    return Dnf(n, [Term(n, primes[j][0], primes[j][1]) for j in picked])
