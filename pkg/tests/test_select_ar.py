import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import stats

from arssa.errors import ContractViolationError, DegenerateDistributionError
from arssa.model import PropensityMatrix, gen_discrete_gaussian
from arssa.oracle import win_probabilities
from arssa.rng import for_realization, stream_keys
from arssa.select_ar import (
    REJECTED,
    SENTINEL,
    ThresholdPolicy,
    batched_select,
    compute_threshold,
    election_step,
    merge_argmin,
    select_rows,
    selection_step,
    tally_identical_rows,
)

# zero or a normal float, so power-of-two rescaling stays exact
values = st.one_of(st.just(0.0), st.floats(1e-100, 1e3))
rows = st.lists(values, min_size=1, max_size=40).filter(lambda r: max(r) > 0)
# draws live on the generator's 2**-53 grid
unit = st.integers(0, 2**53 - 1).map(lambda i: i * 2.0**-53)


def reference(D, w, seed, k, step):
    """Unbatched path: explicit draws from the documented counters."""
    D = np.asarray(D, dtype=float)
    if D.max() == 0:
        return REJECTED
    M = D.size
    v = for_realization(seed, k, "election").uniforms(step * M + np.arange(M))
    return selection_step(election_step(D, w * D.max(), v))


class TestThreshold:
    def test_max(self):
        assert compute_threshold([2, 1, 0], ThresholdPolicy(1)) == 2
        assert compute_threshold([2, 1, 0], ThresholdPolicy(2)) == 4

    def test_degenerate(self):
        with pytest.raises(DegenerateDistributionError):
            compute_threshold([0, 0, 0], ThresholdPolicy(1.5))

    @pytest.mark.parametrize("w", [0.99, 0.0, -1.0, float("nan"), float("inf")])
    def test_policy_rejects_small_w(self, w):
        with pytest.raises(ValueError):
            ThresholdPolicy(w)


class TestElection:
    def test_hand_example(self):
        r = election_step([2.0, 1.0, 0.0], 2.0, [0.9, 0.3, 0.5])
        np.testing.assert_array_equal(r, [0.9, 0.6, SENTINEL])

    def test_all_zero(self):
        np.testing.assert_array_equal(election_step([0, 0, 0], 3.0, [0.1, 0.2, 0.3]), [1.0] * 3)

    @given(unit)
    def test_single_reaction_always_eligible(self, v):
        r = election_step([5.0], 5.0, [v])
        assert r[0] < 1.0
        assert r[0] == pytest.approx(v, abs=1e-15)

    @pytest.mark.parametrize("bad", [[1.0, 0.5], [-0.1, 0.5], [0.5]])
    def test_bad_draws(self, bad):
        with pytest.raises(ContractViolationError):
            election_step([1.0, 1.0], 1.0, bad)

    @given(rows, st.floats(1.0, 10.0), st.data())
    def test_ratings_contract(self, D, w, data):
        D = np.array(D)
        v = np.array(data.draw(st.lists(unit, min_size=D.size, max_size=D.size)))
        r = election_step(D, w * D.max(), v)
        accepted = r < 1.0
        assert np.all(r[~accepted] == SENTINEL)
        assert np.all((r[accepted] >= 0) & (r[accepted] < 1))
        assert not np.any(accepted & (D == 0))


class TestSelection:
    def test_argmin(self):
        assert selection_step([0.9, 0.6, 1.0]) == 1

    def test_tie_lowest_index(self):
        assert selection_step([0.5, 0.5]) == 0
        assert selection_step([1.0, 0.25, 0.7, 0.25]) == 1

    def test_rejected(self):
        assert selection_step([1.0, 1.0, 1.0]) == REJECTED

    @given(st.lists(st.tuples(st.sampled_from([0.1, 0.5, 0.9, 1.0]), st.integers(-1, 50)),
                    min_size=3, max_size=3))
    def test_merge_associative_commutative(self, parts):
        parts = [(r, i if r < 1 else REJECTED) for r, i in parts]
        (r1, i1), (r2, i2), (r3, i3) = parts
        a = merge_argmin(*merge_argmin(r1, i1, r2, i2), r3, i3)
        b = merge_argmin(r1, i1, *merge_argmin(r2, i2, r3, i3))
        c = merge_argmin(r2, i2, r1, i1)
        d = merge_argmin(r1, i1, r2, i2)
        assert (float(a[0]), int(a[1])) == (float(b[0]), int(b[1]))
        assert (float(c[0]), int(c[1])) == (float(d[0]), int(d[1]))


class TestBatched:
    def test_matches_unbatched(self):
        D = np.array([[2.0, 1.0], [2.0, 1.0]])
        got = batched_select(D, ThresholdPolicy(1.0), seed=5, step=3)
        assert list(got) == [reference(D[k], 1.0, 5, k, 3) for k in range(2)]

    @given(st.lists(rows, min_size=1, max_size=6), st.floats(1.0, 4.0),
           st.integers(0, 2**63), st.integers(0, 10**6))
    def test_matches_unbatched_random(self, Ds, w, seed, step):
        M = max(len(r) for r in Ds)
        D = np.array([r + [0.0] * (M - len(r)) for r in Ds])
        got = batched_select(D, ThresholdPolicy(w), seed=seed, step=step)
        assert list(got) == [reference(D[k], w, seed, k, step) for k in range(len(D))]

    def test_zero_rows_rejected(self):
        got = batched_select(np.zeros((5, 3)), ThresholdPolicy(1.0), seed=1)
        assert list(got) == [REJECTED] * 5

    def test_accepts_matrix_type(self):
        m = PropensityMatrix.replicate(gen_discrete_gaussian(16), 4)
        assert batched_select(m, seed=1).shape == (4,)

    @pytest.mark.parametrize("workers,blocks", [(1, 1), (2, 1), (8, 1), (1, 3), (3, 7), (8, 64)])
    def test_partition_independent(self, workers, blocks):
        rng = np.random.default_rng(0)
        D = rng.random((57, 100)) * (rng.random((57, 100)) < 0.7)
        want = batched_select(D, ThresholdPolicy(1.5), seed=11, step=2)
        got = batched_select(D, ThresholdPolicy(1.5), seed=11, step=2, workers=workers,
                             column_blocks=blocks)
        np.testing.assert_array_equal(got, want)

    def test_steps_use_disjoint_counter_windows(self):
        # step s of a realization consumes exactly counters s*M .. s*M+M-1
        D = gen_discrete_gaussian(8).values[None, :]
        keys = stream_keys(3, [0], "election")
        for s in range(20):
            got = select_rows(D, D.max(), keys, s)[0]
            assert got == reference(D[0], 1.0, 3, 0, s)


class TestInvariants:
    @given(rows, st.integers(0, 2**32), st.integers(0, 1000))
    def test_zero_rejection_at_w1(self, D, seed, step):
        got = batched_select(np.array([D]), ThresholdPolicy(1.0), seed=seed, step=step)
        assert got[0] != REJECTED

    @given(rows, st.integers(-30, 30), st.floats(1.0, 3.0), st.data())
    def test_scale_invariance_power_of_two_bit_exact(self, D, e, w, data):
        D = np.array(D)
        c = 2.0 ** e
        v = np.array(data.draw(st.lists(unit, min_size=D.size, max_size=D.size)))
        r1 = election_step(D, w * D.max(), v)
        r2 = election_step(c * D, w * (c * D).max(), v)
        np.testing.assert_array_equal(r1, r2)

    @given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=30),
           st.floats(1e-6, 1e6), st.integers(0, 2**32))
    def test_scale_invariance_selection(self, D, c, seed):
        D = np.array(D)
        a = batched_select(D[None, :], seed=seed, step=1)
        b = batched_select((c * D)[None, :], seed=seed, step=1)
        assert a[0] == b[0]
        v = for_realization(seed, 0, "election").uniforms(np.arange(D.size) + D.size)
        np.testing.assert_allclose(election_step(D, D.max(), v),
                                   election_step(c * D, (c * D).max(), v), rtol=1e-14)

    @given(rows, st.floats(1.0, 3.0), st.data())
    def test_permutation_equivariance(self, D, w, data):
        D = np.array(D)
        v = np.array(data.draw(st.lists(unit, min_size=D.size, max_size=D.size)))
        perm = np.array(data.draw(st.permutations(range(D.size))))
        r = election_step(D, w * D.max(), v)
        ok = r[r < 1]
        assume(np.unique(ok).size == ok.size)
        j = selection_step(r)
        jp = selection_step(election_step(D[perm], w * D.max(), v[perm]))
        if j == REJECTED:
            assert jp == REJECTED
        else:
            assert perm[jp] == j

    def test_accepted_ratings_uniform(self):
        D = np.array([3.0, 1.0, 0.25])
        T = 2.0 * D.max()
        s = for_realization(77, 0, "election")
        n = 60000
        v = s.uniforms(np.arange(n * D.size)).reshape(n, D.size)
        u = v * T
        for j in range(D.size):
            acc = u[:, j] < D[j]
            assert abs(acc.mean() - D[j] / T) < 5 * np.sqrt(D[j] / T / n)
            assert stats.kstest(u[acc, j] / D[j], "uniform").pvalue > 0.01


def test_tally_accounting():
    row = gen_discrete_gaussian(32)
    for K, n in [(1, 1), (7, 100), (100, 100), (3, 1000)]:
        c, rej = tally_identical_rows(row, ThresholdPolicy(2.0), 1, K, n)
        assert c.sum() + rej == n


def test_tally_matches_batched():
    row = gen_discrete_gaussian(16).values
    K, rounds = 9, 6
    want = np.zeros(16, dtype=int)
    for s in range(rounds):
        sel = batched_select(np.tile(row, (K, 1)), seed=4, step=s)
        want += np.bincount(sel, minlength=16)
    got, rej = tally_identical_rows(row, ThresholdPolicy(1.0), 4, K, K * rounds)
    np.testing.assert_array_equal(got, want)
    assert rej == 0


def test_frequencies_follow_oracle():
    row = gen_discrete_gaussian(64)
    K, steps = 1000, 10**4
    counts, rej = tally_identical_rows(row, ThresholdPolicy(1.0), 31, K, K * steps)
    n = K * steps
    p = win_probabilities(row, compute_threshold(row)).per_reaction
    se = np.sqrt(p * (1 - p) / n)
    assert rej == 0
    assert np.all(np.abs(counts / n - p) <= 5 * se + 1e-12)
