import json
import math
from math import comb

import numpy as np
import pytest

from dnfapprox.boolfn import (TruthTable, level_density, majority_table, parity_table,
                              random_monotone_table, weights)
from dnfapprox.dnf import closeness, dnf_to_table, minterm_expansion
from dnfapprox.monotone import (LevelSlice, decomposition_json, lemma32_decompose,
                                lemma33_sample, level_window, sample_interval, slice_dnf,
                                theorem31_approx)
from dnfapprox.seeding import make_rng


def _tail_below(n, k):
    return sum(comb(n, j) for j in range(k)) / 2 ** n


def test_slice_examples():
    s = slice_dnf(majority_table(5), 3)
    assert s.size == 10 and s.dnf.width == 3
    assert slice_dnf(TruthTable.constant(6, False), 3).size == 0
    with pytest.raises(ValueError):
        slice_dnf(parity_table(4), 2)


@pytest.mark.parametrize("seed", range(5))
def test_slice_reproduces_its_layer(seed):
    f = random_monotone_table(10, 0.02, seed)
    w = weights(10)
    for k in range(11):
        s = slice_dnf(f, k)
        T = dnf_to_table(s.dnf)
        assert T <= f
        assert np.array_equal(T.bits[w == k], f.bits[w == k])
        assert all(int(m).bit_count() == k for m in s.dnf.masks)


def test_window():
    # l = sqrt(13 ln 16 / 2) = 4.245...
    assert level_window(13, 0.25) == (3, 10)
    assert level_window(10, 0.2) == (2, 8)


def test_decompose_constant_one():
    n, eps = 12, 0.3
    f = TruthTable.constant(n, True)
    dec = lemma32_decompose(f, eps)
    lo, hi = dec.window
    assert [s.k for s in dec.slices] == [lo] and dec.slices[0].size == comb(n, lo)
    g = dec.table()
    w = weights(n)
    assert np.all(g.bits[(w >= lo) & (w <= hi)])
    assert closeness(g, f) == _tail_below(n, lo)


def test_decompose_majority13():
    f = majority_table(13)
    dec = lemma32_decompose(f, 0.25)
    assert [s.k for s in dec.slices] == [7]
    assert dec.slices[0].size == comb(13, 7)
    g = dec.table()
    assert g <= f and g == f  # every 1-input has weight >= 7


def test_decompose_constant_zero():
    dec = lemma32_decompose(TruthTable.constant(9, False), 0.2)
    assert dec.t == 0 and dec.table() == TruthTable.constant(9, False)


def test_decompose_rejects_non_monotone():
    with pytest.raises(ValueError):
        lemma32_decompose(parity_table(6), 0.2)


@pytest.mark.parametrize("n", [10, 12, 14])
@pytest.mark.parametrize("eps", [0.2, 0.3, 0.5])
def test_decompose_properties(n, eps):
    lo_w, hi_w = n / 2 - math.sqrt(n * math.log(4 / eps) / 2), n / 2 + math.sqrt(n * math.log(4 / eps) / 2)
    for seed in range(6):
        f = random_monotone_table(n, [0.001, 0.004, 0.02, 0.1, 0.3, 0.6][seed], seed)
        dec = lemma32_decompose(f, eps)
        g = dec.table()
        assert g <= f
        assert dec.t <= 2 / eps
        assert closeness(g, f) <= eps
        ks = [s.k for s in dec.slices]
        assert ks == sorted(set(ks))
        cum = np.zeros(1 << n, dtype=bool)
        for i, s in enumerate(dec.slices, 1):
            assert lo_w <= s.k <= hi_w
            assert s.size >= eps / 2 * comb(n, s.k)
            assert all(int(y).bit_count() == s.k for y in s.ys)
            before = level_density(TruthTable(n, cum), s.k)
            cum |= s.table().bits
            after = level_density(TruthTable(n, cum), s.k)
            assert after == pytest.approx(before + s.size / comb(n, s.k))
            assert after >= i * eps / 2 - 1e-12


def test_decomposition_error_accounting():
    n, eps = 12, 0.3
    f = random_monotone_table(n, 0.01, 3)
    dec = lemma32_decompose(f, eps)
    lo, hi = dec.window
    w = weights(n)
    outside = np.count_nonzero((w < lo) | (w > hi)) / 2 ** n
    pruned = sum(lv["fresh_density"] * comb(n, lv["k"]) for lv in dec.levels
                 if lv["status"] == "pruned") / 2 ** n
    assert closeness(dec.table(), f) <= outside + pruned + 1e-12
    assert outside <= eps / 2


def _maj9_slice():
    return slice_dnf(majority_table(9), 5)


def test_lemma33_is_lower_on_majority9():
    piece = _maj9_slice()
    fp = piece.table()
    rng = make_rng(1)
    for _ in range(10):
        res = lemma33_sample(piece, 0.5, rng)
        assert dnf_to_table(res.dnf) <= fp


def test_lemma33_terms_come_from_half_level():
    piece = slice_dnf(random_monotone_table(10, 0.01, 3), 4)
    fp = piece.table()
    res = lemma33_sample(piece, 0.3, make_rng(2))
    levels = {int(m).bit_count() for m in res.dnf.masks}
    allowed = {r.level for r in res.records}
    assert levels <= allowed
    assert all(fp.bits[int(y)] for y in res.dnf.masks)
    assert np.array_equal(res.dnf.masks, res.dnf.values)


def test_lemma33_inclusion_rate(binom):
    piece = _maj9_slice()
    drawn = included = 0
    rng = make_rng(7)
    while drawn < 5000:
        res = lemma33_sample(piece, 0.5, rng)
        for r in res.records:
            if r.l == 2:
                drawn += r.drawn
                included += r.included
    assert binom(included, drawn, 2 ** -1)


def test_lemma33_empty_piece():
    piece = LevelSlice(8, 3, np.zeros(0, dtype=np.int64))
    res = lemma33_sample(piece, 0.3, make_rng(0))
    assert res.dnf.size == 0
    assert all(r.accepted and "vacuous" in r.note for r in res.records)


def test_lemma33_rejects_irregular_piece():
    with pytest.raises(ValueError):
        lemma33_sample(LevelSlice(6, 2, np.array([0b111])), 0.3, make_rng(0))


def test_sample_interval():
    # n=16, k=6, eps=0.3: l from ceil(0.2)=1, top = 8 + sqrt(8 ln 10) = 12.29
    assert sample_interval(16, 6, 0.3) == range(1, 7)


def test_theorem31_constant_zero():
    res = theorem31_approx(TruthTable.constant(10, False), 0.25, 1)
    assert res.dnf.size == 0 and res.report.error == 0


@pytest.mark.parametrize("seed", range(4))
def test_theorem31_lower_sandwich(seed):
    eps = 0.25
    f = random_monotone_table(12, 0.05, seed)
    res = theorem31_approx(f, eps, seed)
    h = dnf_to_table(res.dnf)
    assert h <= f
    assert res.report.error_0side == 0
    assert res.decomposition.t <= 2 / (eps / 2)
    assert res.report.size <= minterm_expansion(f).size


def test_theorem31_report_json():
    f = random_monotone_table(10, 0.02, 1)
    res = theorem31_approx(f, 0.3, 2)
    data = json.loads(decomposition_json(res.decomposition, res.pieces))
    assert data["window"] == list(res.decomposition.window)
    assert [s["k"] for s in data["slices"]] == res.report.params["levels"]
    assert all("attempts" in g for p in data["samples"] for g in p["g_l"])
