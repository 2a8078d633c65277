"""Lower DNF approximators for monotone functions.

``lemma32_decompose`` splits a monotone f into a few regular monotone DNFs
living on the middle levels; ``lemma33_sample`` thins one regular piece by
random sampling; ``theorem31_approx`` composes the two. Every output is a
lower approximator: it never accepts an input that f rejects.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .boolfn import TruthTable, is_monotone, layer, level_density, upward_closure, weights
from .dnf import ApproxReport, Dnf, dnf_to_table, error_split, union, upset_dnf
from .seeding import make_rng, trial_seed

RETRY_CAP = 50


@dataclass(frozen=True)
class LevelSlice:
    """Upset terms T_y for a set of weight-k inputs y (a k-regular monotone DNF)."""

    n: int
    k: int
    ys: np.ndarray

    @property
    def dnf(self) -> Dnf:
        return upset_dnf(self.n, self.ys)

    @property
    def size(self) -> int:
        return int(self.ys.size)

    def table(self) -> TruthTable:
        seeds = np.zeros(1 << self.n, dtype=bool)
        seeds[self.ys] = True
        return TruthTable(self.n, upward_closure(self.n, seeds))


def _require_monotone(f: TruthTable) -> None:
    if not is_monotone(f):
        raise ValueError("function is not monotone")


def slice_dnf(f: TruthTable, k: int) -> LevelSlice:
    """One upset term per weight-k 1-input of f."""
    _require_monotone(f)
    ids = layer(f.n, k)
    return LevelSlice(f.n, k, ids[f.bits[ids]].astype(np.int64))


def window_radius(n: int, epsilon: float) -> float:
    return math.sqrt(n * math.log(4.0 / epsilon) / 2.0)


def level_window(n: int, epsilon: float) -> tuple[int, int]:
    """Integer levels k with |k - n/2| <= sqrt(n ln(4/eps) / 2)."""
    r = window_radius(n, epsilon)
    return max(0, math.ceil(n / 2 - r)), min(n, math.floor(n / 2 + r))


@dataclass
class Decomposition:
    n: int
    epsilon: float
    window: tuple[int, int]
    slices: list[LevelSlice]
    pruned: list[int]
    levels: list[dict]
    source: str = ""

    @property
    def t(self) -> int:
        return len(self.slices)

    def dnf(self) -> Dnf:
        return union(self.n, (s.dnf for s in self.slices))

    def table(self) -> TruthTable:
        seeds = np.zeros(1 << self.n, dtype=bool)
        for s in self.slices:
            seeds[s.ys] = True
        return TruthTable(self.n, upward_closure(self.n, seeds))


def lemma32_decompose(f: TruthTable, epsilon: float, source: str = "") -> Decomposition:
    """Level-by-level decomposition into regular pieces with density pruning.

    Walking the window bottom-up, the candidate terms at level k are the
    weight-k 1-inputs of f not yet covered by the pieces kept so far (the
    minterms of the running disjunction). The level is kept when they make up
    at least eps/2 of the layer and pruned otherwise. Kept levels therefore add
    disjoint eps/2 chunks of density, which bounds their number by 2/eps; the
    missed mass is at most the off-window mass plus eps/2 per pruned layer.
    """
    _require_monotone(f)
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    n = f.n
    lo, hi = level_window(n, epsilon)
    covered = np.zeros(1 << n, dtype=bool)
    slices, pruned, levels = [], [], []
    for k in range(lo, hi + 1):
        ids = layer(n, k)
        fresh = ids[f.bits[ids] & ~covered[ids]]
        density = fresh.size / comb(n, k)
        info = {"k": k, "mu": level_density(f, k), "fresh_density": density}
        if fresh.size == 0:
            info["status"] = "empty"
        elif density < epsilon / 2:
            info["status"] = "pruned"
            pruned.append(k)
        else:
            info["status"] = "kept"
            slices.append(LevelSlice(n, k, fresh.astype(np.int64)))
            seeds = np.zeros(1 << n, dtype=bool)
            seeds[fresh] = True
            covered |= upward_closure(n, seeds)
        info["size"] = int(fresh.size) if info["status"] == "kept" else 0
        levels.append(info)
    return Decomposition(n, epsilon, (lo, hi), slices, pruned, levels, source)


# -- sampled thinning of one regular piece ----------------------------------

@dataclass
class GlRecord:
    l: int
    level: int
    p: float
    candidates: int
    targets: int
    attempts: int = 0
    accepted: bool = False
    size: int = 0
    miss: float = 0.0
    failed: str = ""
    drawn: int = 0     # candidate draws summed over attempts
    included: int = 0  # candidates included, summed over attempts
    note: str = ""


@dataclass
class Lemma33Result:
    n: int
    k: int
    epsilon: float
    dnf: Dnf
    records: list[GlRecord] = field(default_factory=list)

    @property
    def failures(self) -> list[GlRecord]:
        return [r for r in self.records if r.failed]


def sample_interval(n: int, k: int, epsilon: float) -> range:
    """Offsets l >= 1 with k + l in [k + eps sqrt(n)/6, n/2 + sqrt(n ln(3/eps)/2)]."""
    lo = max(1, math.ceil(epsilon * math.sqrt(n) / 6 - 1e-12))
    top = n / 2 + math.sqrt(n * math.log(3.0 / epsilon) / 2.0)
    hi = min(n - k, math.floor(top - k + 1e-12))
    return range(lo, hi + 1)


def lemma33_sample(piece: LevelSlice, epsilon: float, rng: np.random.Generator,
                   retry_cap: int = RETRY_CAP) -> Lemma33Result:
    """Lower approximator for the k-regular monotone function given by ``piece``.

    For each offset l, draw g_l by keeping every upset term T_y, y a 1-input at
    weight k + floor(l/2), independently with probability 2^(-l/2). A draw is
    accepted when its size is at most 3 * 2^(n - l/2) and it misses at most an
    eps/3 fraction of the 1-inputs at weight k + l; otherwise redraw, up to
    ``retry_cap`` attempts. When every attempt fails, the best one is kept and
    the record carries the failed condition.
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    n, k = piece.n, piece.k
    if piece.size and np.any(np.bitwise_count(piece.ys) != k):
        raise ValueError(f"piece is not {k}-regular")
    fbits = piece.table().bits
    wts = weights(n)
    parts = []
    records = []
    for l in sample_interval(n, k, epsilon):
        half = l // 2
        ys = np.flatnonzero(fbits & (wts == k + half)).astype(np.int64)
        xs = np.flatnonzero(fbits & (wts == k + l)).astype(np.int64)
        p = 2.0 ** (-l / 2)
        rec = GlRecord(l, k + half, p, int(ys.size), int(xs.size))
        records.append(rec)
        if xs.size == 0:
            rec.accepted = True
            rec.note = "no 1-inputs at target weight; vacuous"
            continue
        if ys.size == 0:
            rec.failed = "iii"
            rec.miss = 1.0
            rec.note = "no 1-inputs at sampling weight"
            continue
        below = (xs[:, None] & ys[None, :]) == ys[None, :]
        size_cap = 3.0 * 2.0 ** (n - l / 2)
        best = None
        for attempt in range(1, retry_cap + 1):
            pick = rng.random(ys.size) < p
            size = int(np.count_nonzero(pick))
            miss = float(np.mean(~below[:, pick].any(axis=1)))
            rec.attempts = attempt
            rec.drawn += int(ys.size)
            rec.included += size
            ok_ii = size <= size_cap
            ok_iii = miss <= epsilon / 3
            key = (not ok_ii, miss, size)
            if best is None or key < best[0]:
                best = (key, pick, size, miss, ok_ii, ok_iii)
            if ok_ii and ok_iii:
                break
        _, pick, size, miss, ok_ii, ok_iii = best
        rec.size, rec.miss = size, miss
        rec.accepted = ok_ii and ok_iii
        if not rec.accepted:
            rec.failed = "ii+iii" if not (ok_ii or ok_iii) else ("ii" if not ok_ii else "iii")
        parts.append(upset_dnf(n, ys[pick]))
    return Lemma33Result(n, k, epsilon, union(n, parts), records)


# -- composition -------------------------------------------------------------

@dataclass
class MonotoneResult:
    dnf: Dnf
    report: ApproxReport
    decomposition: Decomposition
    pieces: list[Lemma33Result]


def theorem31_approx(f: TruthTable, epsilon: float, seed: int, trial: int = 0,
                     retry_cap: int = RETRY_CAP) -> MonotoneResult:
    """Decompose f at eps/2, thin each of the t pieces at eps/(2t), OR the results."""
    decomp = lemma32_decompose(f, epsilon / 2)
    t = decomp.t
    pieces = [lemma33_sample(s, epsilon / (2 * t), make_rng(trial_seed(seed, i)), retry_cap)
              for i, s in enumerate(decomp.slices)]
    h = union(f.n, (p.dnf for p in pieces))
    err, e0, e1 = error_split(dnf_to_table(h), f)
    failures = sum(len(p.failures) for p in pieces)
    report = ApproxReport(
        "monotone", f.n, epsilon, err, h.size, h.width,
        {"t": t, "levels": [s.k for s in decomp.slices]}, seed, trial, e0, e1,
        "exhaustive", flags={"lemma33_failures": failures,
                             "stage1_error": error_split(decomp.table(), f)[0]},
    )
    return MonotoneResult(h, report, decomp, pieces)


def decomposition_report(decomp: Decomposition, pieces: list[Lemma33Result] | None = None) -> dict:
    out = {
        "source": decomp.source,
        "n": decomp.n,
        "epsilon": decomp.epsilon,
        "window": list(decomp.window),
        "levels": decomp.levels,
        "pruned_levels": decomp.pruned,
        "slices": [{"k": s.k, "size": s.size} for s in decomp.slices],
    }
    if pieces is not None:
        out["samples"] = [
            {"k": p.k, "epsilon": p.epsilon,
             "g_l": [{"l": r.l, "level": r.level, "p": r.p, "attempts": r.attempts,
                      "accepted": r.accepted, "size": r.size, "miss": r.miss,
                      "failed": r.failed, "note": r.note} for r in p.records]}
            for p in pieces
        ]
    return out


def decomposition_json(decomp: Decomposition, pieces=None) -> str:
    return json.dumps(decomposition_report(decomp, pieces), indent=2, sort_keys=True) + "\n"
