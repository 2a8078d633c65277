import math
from itertools import product

import numpy as np
import pytest

from dnfapprox.boolfn import BitString, TruthTable, parity_table, random_table
from dnfapprox.dnf import dnf_to_table
from dnfapprox.seeding import make_rng, trial_seed
from dnfapprox.universal import (UniversalParams, choose_d, expected_size, special_subcubes,
                                 stage1_flip, stage2_cover, subcube_count, uncovered_prob,
                                 universal_approx, universal_trial)


def test_choose_d_simple_loglog():
    assert choose_d(16, 0.2, "simple_loglog") == 2
    assert choose_d(256, 0.2, "simple_loglog") == 3


def test_choose_d_explicit_clamps():
    assert choose_d(4, 0.2, 5) == 4
    assert choose_d(10, 0.2, 3) == 3


def _theorem11_reference(n, eps):
    b = 2 / eps
    ll = lambda v: math.log(math.log(v, b), b)
    return ll(n / (math.log(4 / eps) * ll(n)))


@pytest.mark.parametrize("n, eps", [(12, 0.2), (30, 0.5), (2 ** 20, 0.5), (10 ** 6, 0.1)])
def test_choose_d_theorem11(n, eps):
    want = max(1, min(n, math.floor(_theorem11_reference(n, eps))))
    assert choose_d(n, eps, "theorem11") == want


def test_choose_d_theorem11_degenerate():
    with pytest.raises(ValueError, match="simple_loglog"):
        choose_d(4, 0.2, "theorem11")
    with pytest.raises(ValueError):
        choose_d(10, 0.2, "theorem11")  # log_10 log_10 10 = 0


def _special_by_definition(n, d):
    # enumerate every sub-cube of dimension d; keep those whose free set is an aligned block
    blocks = [set(range(d * k, d * k + d)) for k in range(n // d)]
    cubes = set()
    for assign in product((0, 1, None), repeat=n):
        free = {i for i, a in enumerate(assign) if a is None}
        if free in blocks:
            mask = sum(1 << i for i in range(n) if i not in free)
            values = sum((a or 0) << i for i, a in enumerate(assign))
            cubes.add((mask, values))
    return cubes


@pytest.mark.parametrize("n, d, count", [(4, 2, 8), (3, 2, 2), (5, 5, 1), (6, 2, 48), (5, 1, 80)])
def test_special_subcubes(n, d, count):
    terms = special_subcubes(n, d)
    assert len(terms) == count == subcube_count(n, d)
    assert {(t.mask, t.values) for t in terms} == _special_by_definition(n, d)
    assert all(t.width == n - d for t in terms)


def test_special_subcubes_leftover_never_free():
    # n=3, d=2: only block {1,2}; coordinate 3 always fixed
    assert all(t.mask & 0b100 for t in special_subcubes(3, 2))
    assert special_subcubes(4, 4)[0].width == 0


def test_stage1_edge_cases():
    f = random_table(8, 0.5, 1)
    rec = stage1_flip(f, 0.0, make_rng(3))
    assert rec.g == f and rec.flipped.popcount() == 0
    one = TruthTable.constant(8, True)
    assert stage1_flip(one, 0.8, make_rng(4)).g == one


def test_stage1_flip_rate(binom):
    f = random_table(12, 0.5, 9)
    zeros = (1 << 12) - f.popcount()
    rng = make_rng(10)
    flips = 0
    for _ in range(10000):
        rec = stage1_flip(f, 0.2, rng)
        assert f <= rec.g
        assert not np.any(rec.flipped.bits & f.bits)
        flips += rec.flipped.popcount()
    assert binom(flips, 10000 * zeros, 0.1)


def test_stage2_constant_tables():
    assert stage2_cover(TruthTable.constant(6, True), 2).size == subcube_count(6, 2)
    assert stage2_cover(TruthTable.constant(6, False), 2).size == 0


@pytest.mark.parametrize("n", range(2, 11))
def test_parity_has_no_monochromatic_special_cube(n):
    for d in range(1, n + 1):
        assert stage2_cover(parity_table(n), d).size == 0


def test_stage2_terms_are_monochromatic_special_cubes():
    g = random_table(8, 0.8, 4)
    for d in (1, 2, 3):
        h = stage2_cover(g, d)
        assert all(t.width == 8 - d for t in h.terms)
        mono = {(t.mask, t.values) for t in special_subcubes(8, d)
                if dnf_to_table(type(h)(8, [t])) <= g}
        assert {(t.mask, t.values) for t in h.terms} == mono


def test_uncovered_prob_examples():
    f = TruthTable.constant(6, True)
    assert uncovered_prob(f, 5, 0.3, 2) == 0.0
    x = 13
    single = TruthTable(6, np.arange(64) == x)
    assert uncovered_prob(single, x, 0.3, 6) == pytest.approx(1 - 0.15 ** 63)
    with pytest.raises(ValueError):
        uncovered_prob(single, 0, 0.3, 2)


def test_uncovered_prob_monte_carlo(binom):
    f = random_table(8, 0.6, 21)
    ones = f.ones()
    xs = [int(i) for i in make_rng(22).choice(ones, 5, replace=False)]
    eps, d, trials = 0.6, 2, 20000
    rng = make_rng(23)
    misses = np.zeros(len(xs), dtype=int)
    for _ in range(trials):
        h = dnf_to_table(stage2_cover(stage1_flip(f, eps, rng).g, d)).bits
        misses += ~h[xs]
    for x, m in zip(xs, misses):
        assert binom(int(m), trials, uncovered_prob(f, x, eps, d))


def test_universal_constant_one():
    f = TruthTable.constant(8, True)
    rep, h, _ = universal_approx(f, UniversalParams(0.3, 1, trials=3, seed=1))
    assert rep.error_1side == 0 and rep.error == 0


def test_universal_constant_zero():
    f = TruthTable.constant(8, False)
    for t in range(20):
        rep, h, rec = universal_trial(f, 0.9, 1, trial_seed(5, t), t)
        H = dnf_to_table(h)
        assert H <= rec.g
        assert rep.error == (H.bits & rec.flipped.bits).sum() / 256 <= rec.flipped.popcount() / 256


def test_universal_size_tail(binom):
    f = random_table(16, 0.5, 2)
    eps, d = 0.2, 2
    bound = 4 * math.log(4 / eps) * 2 ** (16 - d)
    _, _, reports = universal_approx(f, UniversalParams(eps, d, trials=200, seed=3))
    big = sum(r.size >= bound for r in reports)
    assert big / 200 <= 0.5 + 3 * math.sqrt(0.25 / 200)


def test_universal_sandwich_and_sizes():
    f = random_table(10, 0.5, 6)
    for d in (1, 2, 3):
        for t in range(10):
            rep, h, rec = universal_trial(f, 0.4, d, trial_seed(1, t), t)
            H = dnf_to_table(h)
            assert f <= rec.g and H <= rec.g
            assert (H.bits & ~f.bits).sum() <= rec.flipped.popcount()
            assert all(tm.width == 10 - d for tm in h.terms)
            assert h.size <= subcube_count(10, d)


def test_mean_size_matches_expectation(binom):
    f = random_table(10, 0.5, 7)
    eps, d = 0.3, 2
    _, _, reports = universal_approx(f, UniversalParams(eps, d, trials=300, seed=8))
    sizes = np.array([r.size for r in reports], dtype=float)
    se = sizes.std(ddof=1) / math.sqrt(sizes.size)
    assert abs(sizes.mean() - expected_size(f, eps, d)) <= 3 * se
    assert reports[0].flags["balance_ok"]
    assert sizes.mean() <= 2 * math.log(4 / eps) * 2 ** (10 - d) + 3 * se


def test_best_trial_tie_break_and_determinism():
    f = random_table(9, 0.5, 1)
    p = UniversalParams(0.3, 2, trials=12, seed=99)
    a = universal_approx(f, p)
    b = universal_approx(f, p, workers=3)
    assert a[0] == b[0] and a[1] == b[1]
    best = min(a[2], key=lambda r: (r.error, r.size, r.trial))
    assert a[0] == best
