"""Truth tables over {0,1}^n and the generators/utilities built on them.

Index convention: ``idx(x) = sum(x_i * 2**(i-1))``, coordinate 1 is the
least-significant bit. Every table, term mask and file format in the package
uses it.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .seeding import make_rng

MAX_N = 30


def check_arity(n: int, cap: int = MAX_N) -> None:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= cap:
        raise ValueError(f"arity n must be in [1, {cap}], got {n!r}")


@dataclass(frozen=True)
class BitString:
    """An input x = x_1..x_n; ``str`` prints x_1 first."""

    bits: tuple[int, ...]

    def __post_init__(self):
        check_arity(len(self.bits))
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"bits must be 0/1, got {self.bits}")

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def weight(self) -> int:
        return sum(self.bits)

    @classmethod
    def from_str(cls, s: str) -> "BitString":
        return cls(tuple(int(c) for c in s))

    @classmethod
    def from_index(cls, n: int, index: int) -> "BitString":
        check_arity(n)
        if not 0 <= index < 1 << n:
            raise ValueError(f"index {index} out of range for n={n}")
        return cls(tuple((index >> i) & 1 for i in range(n)))

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


def idx(x: BitString) -> int:
    v = 0
    for i, b in enumerate(x.bits):
        v |= b << i
    return v


Point = Union[BitString, int]


def as_index(x: Point, n: int) -> int:
    if isinstance(x, BitString):
        if x.n != n:
            raise ValueError(f"arity mismatch: input has n={x.n}, expected {n}")
        return idx(x)
    if not 0 <= x < 1 << n:
        raise ValueError(f"index {x} out of range for n={n}")
    return int(x)


class TruthTable:
    """Complete table of f: {0,1}^n -> {0,1}; immutable."""

    __slots__ = ("n", "bits")

    def __init__(self, n: int, bits):
        check_arity(n)
        arr = np.array(bits, dtype=bool).ravel()
        if arr.size != 1 << n:
            raise ValueError(f"table for n={n} needs {1 << n} entries, got {arr.size}")
        arr.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "bits", arr)

    def __setattr__(self, name, value):
        raise AttributeError("TruthTable is immutable")

    @classmethod
    def constant(cls, n: int, value: bool) -> "TruthTable":
        check_arity(n)
        return cls(n, np.full(1 << n, bool(value)))

    @classmethod
    def from_function(cls, n: int, fn) -> "TruthTable":
        """Tabulate ``fn(BitString) -> bool`` over all inputs (slow; small n)."""
        check_arity(n)
        return cls(n, [bool(fn(BitString.from_index(n, i))) for i in range(1 << n)])

    def __call__(self, x: Point) -> bool:
        return bool(self.bits[as_index(x, self.n)])

    def __len__(self) -> int:
        return self.bits.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruthTable):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return hash((self.n, self.bits.tobytes()))

    def __invert__(self) -> "TruthTable":
        return TruthTable(self.n, ~self.bits)

    def __and__(self, other: "TruthTable") -> "TruthTable":
        _same_arity(self, other)
        return TruthTable(self.n, self.bits & other.bits)

    def __or__(self, other: "TruthTable") -> "TruthTable":
        _same_arity(self, other)
        return TruthTable(self.n, self.bits | other.bits)

    def __le__(self, other: "TruthTable") -> bool:
        """Pointwise ``self(x) <= other(x)`` for every x."""
        _same_arity(self, other)
        return not bool(np.any(self.bits & ~other.bits))

    def popcount(self) -> int:
        return int(np.count_nonzero(self.bits))

    def ones(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def __repr__(self) -> str:
        return f"TruthTable(n={self.n}, ones={self.popcount()})"


def _same_arity(a: TruthTable, b: TruthTable) -> None:
    if a.n != b.n:
        raise ValueError(f"arity mismatch: {a.n} vs {b.n}")


@lru_cache(maxsize=None)
def _weights(n: int) -> np.ndarray:
    w = np.bitwise_count(np.arange(1 << n, dtype=np.int64)).astype(np.int16)
    w.flags.writeable = False
    return w


def weights(n: int) -> np.ndarray:
    """Hamming weight of every index 0..2^n-1 (read-only, cached)."""
    check_arity(n)
    return _weights(n)


def layer(n: int, k: int) -> np.ndarray:
    """Sorted indices of all weight-k inputs; exactly C(n, k) of them."""
    check_arity(n)
    if not 0 <= k <= n:
        raise ValueError(f"level k must be in [0, {n}], got {k}")
    return np.flatnonzero(_weights(n) == k)


def parity_table(n: int) -> TruthTable:
    return TruthTable(n, weights(n) % 2 == 1)


def majority_table(n: int) -> TruthTable:
    # strict majority; ties at even n are 0
    return TruthTable(n, 2 * weights(n).astype(np.int32) > n)


def and_table(n: int) -> TruthTable:
    return TruthTable(n, weights(n) == n)


def or_table(n: int) -> TruthTable:
    return TruthTable(n, weights(n) > 0)


def _cube_view(bits: np.ndarray, n: int, i: int) -> np.ndarray:
    # axis 1 selects coordinate i+1 (0 = unset, 1 = set)
    return bits.reshape(1 << (n - i - 1), 2, 1 << i)


def upward_closure(n: int, seeds) -> np.ndarray:
    """Boolean array marking every y with y >= some seed."""
    out = np.array(seeds, dtype=bool).copy()
    for i in range(n):
        v = _cube_view(out, n, i)
        v[:, 1, :] |= v[:, 0, :]
    return out


def random_table(n: int, q: float, seed: int) -> TruthTable:
    """Each input independently 1 with probability q."""
    check_arity(n)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"density must be in [0, 1], got {q}")
    return TruthTable(n, make_rng(seed).random(1 << n) < q)


def random_monotone_table(n: int, q: float, seed: int) -> TruthTable:
    """Mark inputs with probability q, then take the upward closure."""
    check_arity(n)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"density must be in [0, 1], got {q}")
    marks = make_rng(seed).random(1 << n) < q
    return TruthTable(n, upward_closure(n, marks))


def is_monotone(T: TruthTable) -> bool:
    # single-bit raises suffice by transitivity
    for i in range(T.n):
        v = _cube_view(T.bits, T.n, i)
        if np.any(v[:, 0, :] & ~v[:, 1, :]):
            return False
    return True


def _require_monotone(T: TruthTable) -> None:
    if not is_monotone(T):
        raise ValueError("function is not monotone")


def minterm_mask(T: TruthTable) -> np.ndarray:
    """Boolean array of the minimal 1-inputs of a monotone T."""
    _require_monotone(T)
    out = T.bits.copy()
    for i in range(T.n):
        v = _cube_view(out, T.n, i)
        src = _cube_view(T.bits, T.n, i)
        v[:, 1, :] &= ~src[:, 0, :]
    return out


def minterms(T: TruthTable) -> set[BitString]:
    return {BitString.from_index(T.n, int(i)) for i in np.flatnonzero(minterm_mask(T))}


def level_density(T: TruthTable, k: int) -> float:
    """Fraction of weight-k inputs on which T is 1."""
    ids = layer(T.n, k)
    return int(np.count_nonzero(T.bits[ids])) / comb(T.n, k)


# -- table file format ------------------------------------------------------

def table_to_text(T: TruthTable) -> str:
    digits = -(-(1 << T.n) // 4)
    value = int.from_bytes(np.packbits(T.bits, bitorder="little").tobytes(), "little")
    return f"n={T.n}\n{value:0{digits}x}\n"


def table_from_text(text: str) -> TruthTable:
    lines = [ln.strip() for ln in text.strip().splitlines()]
    if len(lines) != 2 or not lines[0].startswith("n="):
        raise ValueError("table file must be 'n=<int>' followed by one hex line")
    n = int(lines[0][2:])
    check_arity(n)
    size = 1 << n
    digits = -(-size // 4)
    if len(lines[1]) != digits:
        raise ValueError(f"expected {digits} hex digits for n={n}, got {len(lines[1])}")
    value = int(lines[1], 16)
    if value >> size:
        raise ValueError("hex payload has bits beyond 2^n")
    raw = np.frombuffer(value.to_bytes(-(-size // 8), "little"), dtype=np.uint8)
    return TruthTable(n, np.unpackbits(raw, bitorder="little")[:size].astype(bool))


def write_table(T: TruthTable, path: Union[str, Path]) -> None:
    Path(path).write_text(table_to_text(T))


def read_table(path: Union[str, Path]) -> TruthTable:
    return table_from_text(Path(path).read_text())


def bitstrings(n: int) -> Iterable[BitString]:
    for i in range(1 << n):
        yield BitString.from_index(n, i)
