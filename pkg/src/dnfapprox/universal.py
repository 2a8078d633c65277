"""Two-stage randomized DNF approximator for arbitrary functions.

Stage 1 flips each 0-input of f to 1 independently with probability eps/2,
giving g >= f. Stage 2 takes every special sub-cube on which g is identically
1. A special sub-cube of dimension d has its free coordinates on one aligned
block {dk+1, ..., dk+d}; each x lies in exactly floor(n/d) of them and they
pairwise meet only at x.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from .boolfn import Point, TruthTable, as_index
from .dnf import ApproxReport, Dnf, Term, best_report, dnf_to_table, error_split
from .seeding import make_rng, trial_seed


def choose_d(n: int, epsilon: float, d_mode: Union[str, int] = "theorem11") -> int:
    """Sub-cube dimension.

    ``"theorem11"``: d = loglog_b(n / (ln(4/eps) * loglog_b(n))) with b = 2/eps,
    floored and clamped to [1, n]. ``"simple_loglog"``: floor(log2 log2 n).
    An integer is taken as explicit and clamped.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if isinstance(d_mode, (int, np.integer)) and not isinstance(d_mode, bool):
        return max(1, min(n, int(d_mode)))
    if d_mode == "simple_loglog":
        return max(1, min(n, math.floor(math.log2(math.log2(n)))))
    if d_mode != "theorem11":
        raise ValueError(f"unknown d_mode {d_mode!r}")
    base = 2.0 / epsilon
    if base <= 1.0:
        raise ValueError("theorem11 d undefined for epsilon >= 2; use simple_loglog")

    def log_b(v):
        return math.log(v) / math.log(base)

    inner_n = log_b(n)
    if not math.isfinite(inner_n) or inner_n <= 0:
        raise ValueError(f"theorem11 d undefined at n={n}, eps={epsilon} "
                         "(log_b n <= 0); use simple_loglog")
    loglog_n = log_b(inner_n)
    if not math.isfinite(loglog_n) or loglog_n <= 0:
        raise ValueError(f"theorem11 d undefined at n={n}, eps={epsilon} "
                         "(loglog_b n <= 0); use simple_loglog")
    arg = n / (math.log(4.0 / epsilon) * loglog_n)
    inner = log_b(arg)
    if not math.isfinite(inner) or inner <= 0:
        raise ValueError(f"theorem11 d undefined at n={n}, eps={epsilon} "
                         "(inner log <= 0); use simple_loglog")
    d = log_b(inner)
    if not math.isfinite(d):
        raise ValueError("theorem11 d is not finite; use simple_loglog")
    return max(1, min(n, math.floor(d)))


def _check_d(n: int, d: int) -> None:
    if not 1 <= d <= n:
        raise ValueError(f"d must lie in [1, {n}], got {d}")


def _block_mask(k: int, d: int) -> int:
    return ((1 << d) - 1) << (d * k)


def _block_offsets(k: int, d: int) -> np.ndarray:
    return np.arange(1 << d, dtype=np.int64) << (d * k)


def _block_bases(n: int, k: int, d: int) -> np.ndarray:
    ar = np.arange(1 << n, dtype=np.int64)
    return ar[(ar & _block_mask(k, d)) == 0]


def special_subcubes(n: int, d: int) -> list[Term]:
    """All special sub-cubes, block by block, bases in increasing index order."""
    _check_d(n, d)
    full = (1 << n) - 1
    out = []
    for k in range(n // d):
        mask = full & ~_block_mask(k, d)
        out.extend(Term(n, mask, int(b)) for b in _block_bases(n, k, d))
    return out


def subcube_count(n: int, d: int) -> int:
    return (n // d) << (n - d)


def monochromatic(g: TruthTable, d: int) -> list[np.ndarray]:
    """Per block k, a boolean array over bases: is that special cube all-ones in g."""
    _check_d(g.n, d)
    out = []
    for k in range(g.n // d):
        pts = _block_bases(g.n, k, d)[:, None] + _block_offsets(k, d)[None, :]
        out.append(g.bits[pts].all(axis=1))
    return out


@dataclass(frozen=True)
class FlipRecord:
    g: TruthTable
    flipped: TruthTable  # indicator of f = 0, g = 1

    @property
    def flipped_indices(self) -> np.ndarray:
        return self.flipped.ones()


def stage1_flip(f: TruthTable, epsilon: float, rng: np.random.Generator) -> FlipRecord:
    if not 0 <= epsilon <= 1:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    # one uniform per input regardless of f, so draws align across functions
    coins = rng.random(1 << f.n) < epsilon / 2
    flipped = coins & ~f.bits
    return FlipRecord(TruthTable(f.n, f.bits | flipped), TruthTable(f.n, flipped))


def stage2_cover(g: TruthTable, d: int) -> Dnf:
    """DNF of every special sub-cube on which g is identically 1."""
    n = g.n
    _check_d(n, d)
    full = (1 << n) - 1
    masks, values = [], []
    for k, mono in enumerate(monochromatic(g, d)):
        bases = _block_bases(n, k, d)[mono]
        values.append(bases)
        masks.append(np.full(bases.size, full & ~_block_mask(k, d), dtype=np.int64))
    if not masks:
        return Dnf(n)
    return Dnf.from_arrays(n, np.concatenate(masks), np.concatenate(values))


def uncovered_prob(f: TruthTable, x: Point, epsilon: float, d: int) -> float:
    """Exact Pr[h(x) = 0] for a 1-input x.

    The cube of block k through x is taken iff all its f-zeros were flipped,
    probability (eps/2)^z_k; the blocks are independent.
    """
    i = as_index(x, f.n)
    if not f.bits[i]:
        raise ValueError("uncovered_prob requires f(x) = 1")
    _check_d(f.n, d)
    q = epsilon / 2
    prob = 1.0
    for k in range(f.n // d):
        base = i & ~_block_mask(k, d)
        z = int(np.count_nonzero(~f.bits[base + _block_offsets(k, d)]))
        prob *= 1.0 - q ** z
    return prob


def expected_size(f: TruthTable, epsilon: float, d: int) -> float:
    """E[size(h)] = sum over special cubes of (eps/2)^(#f-zeros in cube)."""
    q = epsilon / 2
    total = 0.0
    for k in range(f.n // d):
        pts = _block_bases(f.n, k, d)[:, None] + _block_offsets(k, d)[None, :]
        zeros = np.count_nonzero(~f.bits[pts], axis=1)
        total += float(np.sum(q ** zeros))
    return total


def size_bound(n: int, epsilon: float, d: int) -> float:
    """4 ln(4/eps) 2^(n-d)."""
    return 4.0 * math.log(4.0 / epsilon) * 2.0 ** (n - d)


def balance_ok(f: TruthTable, epsilon: float) -> bool:
    p1 = f.popcount() / len(f)
    return min(p1, 1.0 - p1) >= epsilon


@dataclass(frozen=True)
class UniversalParams:
    epsilon: float
    d_mode: Union[str, int] = "theorem11"
    trials: int = 1
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def universal_trial(f: TruthTable, epsilon: float, d: int, seed: int,
                    trial: int = 0) -> tuple[ApproxReport, Dnf, FlipRecord]:
    rec = stage1_flip(f, epsilon, make_rng(seed))
    h = stage2_cover(rec.g, d)
    err, e0, e1 = error_split(dnf_to_table(h), f)
    report = ApproxReport(
        construction="universal", n=f.n, epsilon=epsilon, error=err,
        size=h.size, width=h.width, params={"d": d}, seed=seed, trial=trial,
        error_0side=e0, error_1side=e1,
        flags={"balance_ok": balance_ok(f, epsilon),
               "flipped": int(rec.flipped.popcount())},
    )
    return report, h, rec


def universal_approx(f: TruthTable, params: UniversalParams,
                     workers: int = 1) -> tuple[ApproxReport, Dnf, list[ApproxReport]]:
    """Run seeded trials; return (best report, its DNF, all reports by trial)."""
    d = choose_d(f.n, params.epsilon, params.d_mode)

    def one(t):
        rep, h, _ = universal_trial(f, params.epsilon, d, trial_seed(params.seed, t), t)
        return rep, h

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, range(params.trials)))
    else:
        results = [one(t) for t in range(params.trials)]
    reports = [r for r, _ in results]
    b = best_report(reports)
    return reports[b], results[b][1], reports
