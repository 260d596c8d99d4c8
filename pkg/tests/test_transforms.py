from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from sadic import generators as gen
from sadic import transforms as tf
from sadic.digits import constant_stream, eventually_periodic, prefix_array
from sadic.stats import run_stats

M = 10**4


def pre(x, n=M):
    return prefix_array(x, n)


def word(digits, s=3):
    return eventually_periodic(digits, (0,), s)


def seven_oracle(digits):
    """Rewrite digit-1 occurrences by their rank k, one digit at a time."""
    out, k = [], 0
    for d in digits:
        if d == 1:
            k += 1
            if k % 7 == 0:
                d = 0
            elif k % 7 == 1 and k > 1:
                d = 2
        out.append(d)
    return out


def brute_permute(digits, perm):
    w = len(perm)
    out = list(digits)
    for start in range(0, len(digits) - len(digits) % w, w):
        for j in range(w):
            out[start + j] = digits[start + perm[j]]
    return out


@pytest.fixture(scope="module")
def uniform():
    return gen.uniform_stream(3, 2024)


def test_identity(uniform):
    assert pre(tf.identity()(word([0, 1, 2])), 3).tolist() == [0, 1, 2]
    for t in (tf.pair_swap(), tf.shift(), tf.seven_replacement()):
        assert np.array_equal(pre(tf.compose(t, tf.identity())(uniform)), pre(t(uniform)))


def test_pair_swap(uniform):
    assert pre(tf.pair_swap()(word([0, 1, 2, 0])), 4).tolist() == [1, 0, 0, 2]
    assert np.array_equal(pre(tf.pair_swap()(tf.pair_swap()(uniform))), pre(uniform))
    x, y = pre(uniform), pre(tf.pair_swap()(uniform))
    cx = np.cumsum(np.eye(3, dtype=np.int64)[x], axis=0)
    cy = np.cumsum(np.eye(3, dtype=np.int64)[y], axis=0)
    assert np.array_equal(cx[1::2], cy[1::2])  # N_i(y, 2k) = N_i(x, 2k)
    assert np.abs(cx - cy).max() <= 1


def test_triple_reverse(uniform):
    assert pre(tf.triple_reverse()(word([0, 1, 2, 0, 1, 2])), 6).tolist() == [2, 1, 0, 2, 1, 0]
    assert np.array_equal(pre(tf.triple_reverse()(tf.triple_reverse()(uniform))), pre(uniform))


@pytest.mark.parametrize("perm", [(1, 0), (2, 1, 0), (1, 2, 0), (3, 0, 2, 1)])
def test_windowed_permutation_matches_brute_force(uniform, perm):
    t = tf.windowed_permutation(perm)
    x = pre(uniform).tolist()
    cut = M - M % len(perm)
    assert pre(t(uniform)).tolist()[:cut] == brute_permute(x, perm)[:cut]
    assert np.array_equal(pre(t.inverse(t(uniform))), pre(uniform))


def test_windowed_permutation_across_chunk_boundaries():
    # chunk length 65536 is not a multiple of 3 or 5
    x = gen.uniform_stream(3, 1)
    n = 3 * 65536 + 7
    for perm in [(2, 1, 0), (4, 3, 0, 1, 2)]:
        out = pre(tf.windowed_permutation(perm)(x), n).tolist()
        assert out[: n - n % len(perm)] == brute_permute(pre(x, n).tolist(), perm)[: n - n % len(perm)]


def test_shift_and_prepend(uniform):
    assert pre(tf.shift()(word([1, 0, 2])), 2).tolist() == [0, 2]
    assert pre(tf.prepend(2)(word([0, 1])), 3).tolist() == [2, 0, 1]
    for i in range(3):
        assert np.array_equal(pre(tf.compose(tf.shift(), tf.prepend(i))(uniform)), pre(uniform))
    with pytest.raises(Exception):
        tf.prepend(3)(uniform)


def test_shift_and_prepend_preserve_frequencies():
    x = gen.iid_stream((0.2, 0.3, 0.5), 3)
    for t in (tf.shift(), tf.prepend(0), tf.prepend(2)):
        row = run_stats(t(x), [10**6]).last()
        assert max(abs(v - f) for v, f in zip(row.freqs(), (0.2, 0.3, 0.5))) < 0.005
        assert t(x).declared_tau == x.declared_tau


def test_transpose_at(uniform):
    assert pre(tf.transpose_at(1)(word([0, 1, 2])), 3).tolist() == [1, 0, 2]
    t = tf.transpose_at(70000)  # straddles the first chunk boundary
    assert np.array_equal(pre(t(t(uniform)), 80000), pre(uniform, 80000))
    a, b = pre(uniform, 80000), pre(t(uniform), 80000)
    assert a[69999] == b[70000] and a[70000] == b[69999]
    assert np.array_equal(np.bincount(a, minlength=3), np.bincount(b, minlength=3))
    with pytest.raises(Exception):
        tf.transpose_at(0)


def test_inverter():
    x = constant_stream(0)
    y = tf.inverter()(x)
    assert pre(y, 10).tolist() == [2] * 10
    assert run_stats(y, [100]).last().mean() == 2 and run_stats(x, [100]).last().mean() == 0
    assert y.declared_mean == 2
    assert pre(tf.inverter()(y), 10).tolist() == [0] * 10


def test_mod_increment(uniform):
    x = constant_stream(0)
    y = tf.mod_increment(1)(x)
    assert pre(y, 5).tolist() == [1] * 5
    assert run_stats(x, [50]).last().freqs()[0] == 1 and run_stats(y, [50]).last().freqs()[0] == 0
    assert np.array_equal(pre(tf.mod_increment(0)(uniform)), pre(uniform))
    inc = tf.mod_increment(1)
    assert np.array_equal(pre(inc(inc(inc(uniform)))), pre(uniform))


def test_seven_replacement_all_ones():
    out = pre(tf.seven_replacement()(constant_stream(1)), 16).tolist()
    assert out == [1, 1, 1, 1, 1, 1, 0, 2, 1, 1, 1, 1, 1, 0, 2, 1]


def test_seven_replacement_matches_oracle(uniform):
    n = 3 * 65536 + 11
    assert pre(tf.seven_replacement()(uniform), n).tolist() == seven_oracle(pre(uniform, n).tolist())


@settings(max_examples=100, deadline=None)
@given(hst.lists(hst.integers(0, 2), min_size=1, max_size=300))
def test_seven_replacement_counts(digits):
    x = eventually_periodic(digits, (0,), 3)
    out = pre(tf.seven_replacement()(x), len(digits)).tolist()
    assert out == seven_oracle(digits)
    m = digits.count(1)
    zeros_made = sum(1 for a, b in zip(digits, out) if a == 1 and b == 0)
    twos_made = sum(1 for a, b in zip(digits, out) if a == 1 and b == 2)
    assert zeros_made == m // 7
    assert twos_made == max(m - 1, 0) // 7
    # running digit sums never drift by more than one
    assert np.abs(np.cumsum(out) - np.cumsum(digits)).max() <= 1


def test_seven_replacement_frequencies(uniform):
    row = run_stats(tf.seven_replacement()(uniform), [10**6]).last()
    for v, t in zip(row.freqs(), (8 / 21, 5 / 21, 8 / 21)):
        assert abs(v - t) < 0.01
    ref = run_stats(uniform, [10**6]).last()
    assert abs(row.mean() - ref.mean()) < 0.01
    assert tf.seven_replacement()(uniform).declared_tau.tau == (Fraction(8, 21), Fraction(5, 21), Fraction(8, 21))


def test_seven_replacement_needs_ternary():
    with pytest.raises(tf.AlphabetMismatch):
        tf.seven_replacement()(gen.uniform_stream(4, 0))


def test_be_canonicalizer():
    assert pre(tf.be_canonicalizer()(gen.iid_stream((1, 0, 0), 0)), 20).tolist() == [0] * 20
    y = tf.be_canonicalizer()(gen.uniform_stream(3, 5))
    assert max(abs(v - 1 / 3) for v in run_stats(y, [10**6]).last().freqs()) < 0.02
    a = tf.be_canonicalizer()(gen.iid_stream((0.2, 0.3, 0.5), 1))
    b = tf.be_canonicalizer()(gen.iid_stream((0.2, 0.3, 0.5), 99))
    assert np.array_equal(pre(a), pre(b))


def test_be_canonicalizer_metadata_rules():
    osc = gen.oscillating_stream(1)
    assert tf.be_canonicalizer()(osc) is osc
    undeclared = tf.seven_replacement()(osc)
    with pytest.raises(tf.FrequenciesUnknown):
        tf.be_canonicalizer()(undeclared)
    est = tf.estimate_frequencies(1000)(undeclared)
    assert est.declared_tau is not None
    tf.be_canonicalizer()(est)


def test_compose_examples(uniform):
    swap, rev, inv = tf.pair_swap(), tf.triple_reverse(), tf.inverter()
    assert np.array_equal(pre(tf.compose(swap, swap)(uniform)), pre(uniform))
    assert np.array_equal(pre(tf.compose(inv, inv)(uniform)), pre(uniform))
    witness = eventually_periodic((), (0, 1, 2), 3)  # alpha = 0,1,2,0,1,2,...
    x = pre(witness, 6).tolist()
    a = pre(tf.compose(rev, swap)(witness), 6).tolist()
    b = pre(tf.compose(swap, rev)(witness), 6).tolist()
    # index oracles: rev3 after swap2 and swap2 after rev3
    assert a == [x[3], x[0], x[1], x[4], x[5], x[2]]
    assert b == [x[1], x[2], x[5], x[0], x[3], x[4]]
    assert a != b


def test_compose_alphabet_mismatch():
    with pytest.raises(tf.AlphabetMismatch):
        tf.compose(tf.inverter(3), tf.inverter(4))


def test_invert_transform():
    assert tf.invert_transform(tf.pair_swap()) == tf.pair_swap()
    assert tf.invert_transform(tf.mod_increment(1, 3)) == tf.mod_increment(2, 3)
    for t in (tf.shift(), tf.prepend(1), tf.seven_replacement(), tf.be_canonicalizer()):
        with pytest.raises(tf.NotInvertible):
            tf.invert_transform(t)


GROUP = [tf.pair_swap(), tf.triple_reverse(), tf.windowed_permutation((1, 2, 0)), tf.transpose_at(5), tf.inverter(), tf.mod_increment(1)]


@settings(max_examples=40, deadline=None)
@given(hst.sampled_from(GROUP), hst.sampled_from(GROUP), hst.sampled_from(GROUP), hst.integers(0, 2**32))
def test_group_laws(f, g, h, seed):
    x = gen.uniform_stream(3, seed)
    base = pre(x, 3000)
    left = tf.compose(h, tf.compose(g, f))
    right = tf.compose(tf.compose(h, g), f)
    assert np.array_equal(pre(left(x), 3000), pre(right(x), 3000))
    gf = tf.compose(g, f)
    assert gf.invertible
    assert np.array_equal(pre(gf.inverse(gf(x)), 3000), base)
    assert np.array_equal(pre(gf(gf.inverse(x)), 3000), base)


@pytest.mark.parametrize(
    "t", [tf.pair_swap(), tf.triple_reverse(), tf.compose(tf.triple_reverse(), tf.pair_swap())], ids=str
)
def test_window_counts_exactly_invariant(uniform, t):
    pts = list(range(t.window, M + 1, t.window))
    a, b = run_stats(uniform, pts), run_stats(t(uniform), pts)
    assert [r.counts for r in a.rows] == [r.counts for r in b.rows]


@pytest.mark.parametrize("t", [tf.identity(), tf.pair_swap(), tf.shift(), tf.prepend(2), tf.seven_replacement()], ids=str)
def test_mean_preserving_transforms_keep_extreme_classes(t):
    # any r-preserving map sends frequency class (0,0,1) into itself
    for tau, i in (((0, 0, 1), 2), ((1, 0, 0), 0)):
        row = run_stats(t(gen.iid_stream(tau, 1)), [10**6]).last()
        assert row.freqs()[i] > 0.99


def test_count_inequalities_on_mixtures():
    # mean tends to 2 along a mixture whose non-2 digits thin out
    digits = np.full(10**6, 2, dtype=np.uint8)
    rng = np.random.default_rng(0)
    idx = rng.choice(10**6, size=2000, replace=False)
    digits[idx] = rng.integers(0, 2, size=2000)
    x = eventually_periodic(digits.tolist(), (2,), 3)
    row = run_stats(x, [10**6]).last()
    assert row.mean() > 1.99 and row.freqs()[2] > 0.99
