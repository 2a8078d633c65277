"""DNF terms (sub-cubes), formulas, fast evaluation and the closeness metric."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .boolfn import MAX_N, BitString, Point, TruthTable, as_index, check_arity, idx


@dataclass(frozen=True)
class Term:
    """Conjunction fixing the coordinates in ``mask`` to the bits in ``values``.

    Bit i-1 of ``mask``/``values`` refers to coordinate i. The accepted set is
    the sub-cube of dimension ``n - width``.
    """

    n: int
    mask: int
    values: int

    def __post_init__(self):
        check_arity(self.n)
        full = (1 << self.n) - 1
        if self.mask & ~full:
            raise ValueError(f"mask {self.mask:#x} has bits beyond n={self.n}")
        if self.values & ~self.mask:
            raise ValueError("values has bits outside mask")

    @property
    def width(self) -> int:
        return self.mask.bit_count()

    @classmethod
    def from_str(cls, s: str) -> "Term":
        mask = values = 0
        for i, c in enumerate(s):
            if c == "-":
                continue
            if c not in "01":
                raise ValueError(f"bad term character {c!r}")
            mask |= 1 << i
            values |= int(c) << i
        return cls(len(s), mask, values)

    def __str__(self) -> str:
        out = []
        for i in range(self.n):
            if (self.mask >> i) & 1:
                out.append(str((self.values >> i) & 1))
            else:
                out.append("-")
        return "".join(out)


def term_accepts(t: Term, x: Point) -> bool:
    return (as_index(x, t.n) & t.mask) == t.values


class Dnf:
    """Ordered list of terms over n variables, held as parallel mask/value arrays.

    Duplicate terms are kept and counted by ``size``.
    """

    __slots__ = ("n", "masks", "values")

    def __init__(self, n: int, terms: Iterable[Term] = ()):
        terms = list(terms)
        for t in terms:
            if t.n != n:
                raise ValueError(f"term arity {t.n} does not match DNF arity {n}")
        self._set(n, [t.mask for t in terms], [t.values for t in terms])

    def _set(self, n, masks, values):
        check_arity(n)
        m = np.array(masks, dtype=np.int64).ravel()
        v = np.array(values, dtype=np.int64).ravel()
        if m.shape != v.shape:
            raise ValueError("masks and values must have equal length")
        if np.any(v & ~m) or np.any(m >> n):
            raise ValueError("invalid term arrays")
        m.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "masks", m)
        object.__setattr__(self, "values", v)

    def __setattr__(self, name, value):
        raise AttributeError("Dnf is immutable")

    @classmethod
    def from_arrays(cls, n: int, masks, values) -> "Dnf":
        d = cls.__new__(cls)
        d._set(n, masks, values)
        return d

    @property
    def terms(self) -> tuple[Term, ...]:
        return tuple(Term(self.n, int(m), int(v)) for m, v in zip(self.masks, self.values))

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return int(self.masks.size)

    @property
    def size(self) -> int:
        return len(self)

    @property
    def width(self) -> int:
        if not len(self):
            return 0
        return int(np.bitwise_count(self.masks).max())

    def __or__(self, other: "Dnf") -> "Dnf":
        if other.n != self.n:
            raise ValueError(f"arity mismatch: {self.n} vs {other.n}")
        return Dnf.from_arrays(
            self.n,
            np.concatenate([self.masks, other.masks]),
            np.concatenate([self.values, other.values]),
        )

    def append(self, t: Term) -> "Dnf":
        return self | Dnf(self.n, [t])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dnf):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.masks, other.masks)
                and np.array_equal(self.values, other.values))

    def __repr__(self) -> str:
        return f"Dnf(n={self.n}, size={self.size}, width={self.width})"


def union(n: int, dnfs: Iterable[Dnf]) -> Dnf:
    dnfs = list(dnfs)
    if not dnfs:
        return Dnf(n)
    return Dnf.from_arrays(n, np.concatenate([d.masks for d in dnfs]),
                           np.concatenate([d.values for d in dnfs]))


def dnf_eval(D: Dnf, x: Point) -> bool:
    i = as_index(x, D.n)
    return bool(np.any((i & D.masks) == D.values))


def _free_offsets(free_mask: int) -> np.ndarray:
    offs = np.zeros(1, dtype=np.int64)
    bit = 0
    while free_mask >> bit:
        if (free_mask >> bit) & 1:
            offs = np.concatenate([offs, offs + (1 << bit)])
        bit += 1
    return offs


def dnf_to_table(D: Dnf, cap: int = MAX_N) -> TruthTable:
    """Tabulate D by stamping every term's accepted sub-cube into the table."""
    check_arity(D.n, cap)
    full = (1 << D.n) - 1
    out = np.zeros(1 << D.n, dtype=bool)
    if len(D):
        order = np.argsort(D.masks, kind="stable")
        masks, values = D.masks[order], D.values[order]
        cuts = np.flatnonzero(np.diff(masks)) + 1
        for start, stop in zip(np.r_[0, cuts], np.r_[cuts, masks.size]):
            offs = _free_offsets(full & ~int(masks[start]))
            vals = np.unique(values[start:stop])
            if offs.size == out.size:
                out[:] = True
                break
            out[(vals[:, None] + offs[None, :]).ravel()] = True
    return TruthTable(D.n, out)


def closeness(T1: TruthTable, T2: TruthTable) -> float:
    """Fraction of inputs on which the two tables disagree."""
    if T1.n != T2.n:
        raise ValueError(f"arity mismatch: {T1.n} vs {T2.n}")
    return int(np.count_nonzero(T1.bits != T2.bits)) / (1 << T1.n)


def minterm_expansion(T: TruthTable) -> Dnf:
    ones = T.ones().astype(np.int64)
    return Dnf.from_arrays(T.n, np.full(ones.size, (1 << T.n) - 1, dtype=np.int64), ones)


def upset_term(y: BitString) -> Term:
    """Positive term on the set bits of y; accepts exactly {x : x >= y}."""
    i = idx(y)
    return Term(y.n, i, i)


def upset_dnf(n: int, ys) -> Dnf:
    ys = np.asarray(ys, dtype=np.int64)
    return Dnf.from_arrays(n, ys, ys)


# -- reports ----------------------------------------------------------------

@dataclass
class ApproxReport:
    construction: str
    n: int
    epsilon: float
    error: float
    size: int
    width: int
    params: dict = field(default_factory=dict)
    seed: int = 0
    trial: int = 0
    error_0side: float = 0.0
    error_1side: float = 0.0
    error_method: str = "exhaustive"
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.error <= 1.0:
            raise ValueError(f"error must lie in [0, 1], got {self.error}")
        if self.size < 0 or self.width < 0:
            raise ValueError("size and width must be non-negative")


def error_split(h: TruthTable, f: TruthTable) -> tuple[float, float, float]:
    """(total, 0-side, 1-side) error of h against f.

    0-side counts false positives (f = 0, h = 1); 1-side counts misses.
    """
    if h.n != f.n:
        raise ValueError(f"arity mismatch: {h.n} vs {f.n}")
    scale = 1 << f.n
    fp = int(np.count_nonzero(h.bits & ~f.bits))
    fn = int(np.count_nonzero(~h.bits & f.bits))
    return (fp + fn) / scale, fp / scale, fn / scale


def best_report(reports: list[ApproxReport]) -> int:
    """Index of the best trial: lowest error, then smaller size, then trial index."""
    return min(range(len(reports)),
               key=lambda i: (reports[i].error, reports[i].size, reports[i].trial))


# -- DNF file format --------------------------------------------------------

def dnf_to_text(D: Dnf) -> str:
    lines = [f"n={D.n} terms={D.size}"]
    lines.extend(str(t) for t in D.terms)
    return "\n".join(lines) + "\n"


def dnf_from_text(text: str) -> Dnf:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty DNF file")
    head = dict(part.split("=", 1) for part in lines[0].split())
    try:
        n, count = int(head["n"]), int(head["terms"])
    except (KeyError, ValueError):
        raise ValueError(f"bad DNF header {lines[0]!r}") from None
    body = [ln.strip() for ln in lines[1:] if ln.strip()]
    if len(body) != count:
        raise ValueError(f"header declares {count} terms, found {len(body)}")
    terms = []
    for ln in body:
        if len(ln) != n:
            raise ValueError(f"term {ln!r} does not have {n} characters")
        terms.append(Term.from_str(ln))
    return Dnf(n, terms)


def write_dnf(D: Dnf, path: Union[str, Path]) -> None:
    Path(path).write_text(dnf_to_text(D))


def read_dnf(path: Union[str, Path]) -> Dnf:
    return dnf_from_text(Path(path).read_text())
