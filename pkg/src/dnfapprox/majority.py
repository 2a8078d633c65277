"""Random monotone DNF approximator for majority (Talagrand-style).

Each of T terms conjoins w coordinates picked uniformly with replacement. A
weight-m input satisfies one term with probability (m/n)^w, so
Pr_D[D(x) = 1] = 1 - (1 - (m/n)^w)^T depends on x only through its weight.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb

import numpy as np

from .boolfn import TruthTable, check_arity, majority_table
from .dnf import ApproxReport, Dnf, best_report, dnf_to_table, error_split
from .oracle import DEFAULT_SAMPLES, EXHAUSTIVE_CAP, mc_error
from .seeding import make_rng, trial_seed


def width_for_epsilon(n: int, epsilon: float) -> int:
    # guard against sqrt(n)/eps landing a hair above an integer
    return max(1, math.ceil(math.sqrt(n) / epsilon - 1e-9))


def term_count(w: int) -> int:
    return max(1, round(math.log(2) * 2 ** w))


@dataclass(frozen=True)
class TalagrandParams:
    n: int
    w: int
    T: int
    epsilon: float = float("nan")
    seed: int = 0

    @classmethod
    def from_epsilon(cls, n: int, epsilon: float, seed: int = 0) -> "TalagrandParams":
        w = width_for_epsilon(n, epsilon)
        return cls(n, w, term_count(w), epsilon, seed)

    @classmethod
    def from_width(cls, n: int, w: int, seed: int = 0) -> "TalagrandParams":
        return cls(n, w, term_count(w), math.sqrt(n) / w, seed)

    @property
    def below_threshold(self) -> bool:
        return self.epsilon < 1.0 / math.sqrt(self.n)


def talagrand_sample(n: int, w: int, T: int, rng: np.random.Generator) -> Dnf:
    check_arity(n)
    if w < 1 or T < 1:
        raise ValueError(f"w and T must be >= 1, got w={w}, T={T}")
    picks = rng.integers(0, n, size=(T, w))
    masks = np.bitwise_or.reduce(np.left_shift(1, picks, dtype=np.int64), axis=1)
    return Dnf.from_arrays(n, masks, masks)


def accept_prob(n: int, w: int, T: int, m: int) -> float:
    if not 0 <= m <= n:
        raise ValueError(f"weight must lie in [0, {n}], got {m}")
    return 1.0 - (1.0 - (m / n) ** w) ** T


def weight_to_t(n: int, m: int) -> float:
    """Normalized weight (2m - n)/sqrt(n); majority is 1 iff this is positive."""
    if not 0 <= m <= n:
        raise ValueError(f"weight must lie in [0, {n}], got {m}")
    return (2 * m - n) / math.sqrt(n)


def expected_error(n: int, w: int, T: int) -> float:
    """E_D[Pr_x[D(x) != Maj(x)]] summed exactly over weight classes."""
    total = 0.0
    for m in range(n + 1):
        p = accept_prob(n, w, T, m)
        maj = 1.0 if 2 * m > n else 0.0
        total += comb(n, m) * abs(p - maj)
    return total / 2 ** n


def majority_trial(n: int, w: int, T: int, seed: int, trial: int = 0,
                   epsilon: float = float("nan"), cap: int = EXHAUSTIVE_CAP,
                   maj: TruthTable | None = None) -> tuple[ApproxReport, Dnf]:
    D = talagrand_sample(n, w, T, make_rng(seed))
    params = {"w": w, "T": T}
    if n <= cap:
        if maj is None:
            maj = majority_table(n)
        err, e0, e1 = error_split(dnf_to_table(D), maj)
        rep = ApproxReport("majority", n, epsilon, err, D.size, D.width, params,
                           seed, trial, e0, e1, "exhaustive")
    else:
        est = mc_error(D, lambda x: 2 * int(x).bit_count() > n, DEFAULT_SAMPLES, seed)
        rep = ApproxReport("majority", n, epsilon, est.estimate, D.size, D.width,
                           params, seed, trial, float("nan"), float("nan"),
                           "monte_carlo", flags={"half_width": est.half_width})
    if not math.isnan(epsilon) and epsilon < 1.0 / math.sqrt(n):
        rep.flags["below_threshold"] = True
    return rep, D


def majority_approx(n: int, epsilon: float, trials: int, seed: int,
                    w: int | None = None, cap: int = EXHAUSTIVE_CAP,
                    workers: int = 1) -> tuple[ApproxReport, Dnf, list[ApproxReport]]:
    """Best of ``trials`` sampled DNFs; ``w`` overrides the width derived from eps."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if w is None:
        w = width_for_epsilon(n, epsilon)
    T = term_count(w)
    maj = majority_table(n) if n <= cap else None

    def one(t):
        return majority_trial(n, w, T, trial_seed(seed, t), t, epsilon, cap, maj)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, range(trials)))
    else:
        results = [one(t) for t in range(trials)]
    reports = [r for r, _ in results]
    b = best_report(reports)
    return reports[b], results[b][1], reports
