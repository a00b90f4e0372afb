import numpy as np
import pytest

from tscorr import (
    EncoderConfig,
    SelectionScheme,
    ShortSeriesWarning,
    TimeSeriesMatrix,
    ValidationError,
    acf_length,
    build_matrix,
    ccf_length,
    encode_acf,
    encode_ccf,
    encode_tcf,
    group,
    partition,
    pearson,
    select_subset,
    tcf_length,
)

from reference import naive_encode, naive_group, naive_partition, naive_uniform_indices


def rand_matrix(rng, n, k, scale=1.0):
    return TimeSeriesMatrix(rng.normal(size=(n, k)) * scale)


class TestBuildMatrix:
    def test_transpose(self):
        m = build_matrix([[1, 3], [2, 4]])
        assert m.data.tolist() == [[1, 2], [3, 4]]

    def test_single_frame_rejected(self):
        with pytest.raises(ValidationError):
            build_matrix([[1, 2, 3]])

    def test_inconsistent_lengths(self):
        with pytest.raises(ValidationError):
            build_matrix([[1, 2], [1, 2, 3]])

    def test_wide_frames(self):
        frames = [np.zeros(4096), np.ones(4096)]
        m = build_matrix(frames)
        assert m.n == 4096 and m.k == 2


class TestMatrixValidation:
    def test_non_finite(self):
        with pytest.raises(ValidationError):
            TimeSeriesMatrix([[1.0, np.nan]])

    def test_k_below_two(self):
        with pytest.raises(ValidationError):
            TimeSeriesMatrix([[1.0]])

    def test_empty(self):
        with pytest.raises(ValidationError):
            TimeSeriesMatrix(np.zeros((0, 5)))


class TestGroup:
    def test_interleave_example(self):
        ts = TimeSeriesMatrix([[1, 2], [3, 4], [5, 6], [7, 8]])
        g = group(ts, 2)
        assert g.data.tolist() == [[1, 3, 2, 4], [5, 7, 6, 8]]
        assert g.delta == 2

    def test_identity_when_lambda_equals_n(self):
        rng = np.random.default_rng(0)
        ts = rand_matrix(rng, 6, 9)
        g = group(ts, 6)
        np.testing.assert_array_equal(g.data, ts.data)

    def test_shape_at_full_scale_config(self):
        ts = TimeSeriesMatrix(np.zeros((4096, 3)))
        g = group(ts, 64)
        assert g.data.shape == (64, 64 * 3)

    def test_non_divisible_is_error_naming_both(self):
        ts = TimeSeriesMatrix(np.zeros((10, 4)))
        with pytest.raises(ValidationError, match="3.*10|10.*3"):
            group(ts, 3)

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.choice([2, 4, 6, 8, 12, 16, 24, 32, 64]))
            k = int(rng.integers(2, 12))
            lam = int(rng.choice([d for d in range(1, n + 1) if n % d == 0]))
            ts = rand_matrix(rng, n, k)
            got = group(ts, lam).data
            want = naive_group(ts.data.tolist(), lam)
            np.testing.assert_allclose(got, want)

    def test_content_preservation_exhaustive_small(self):
        rng = np.random.default_rng(11)
        for n in range(1, 65):
            k = int(rng.integers(2, 6))
            ts = rand_matrix(rng, n, k)
            for lam in [d for d in range(1, n + 1) if n % d == 0]:
                g = group(ts, lam)
                assert sorted(g.data.reshape(-1)) == sorted(ts.data.reshape(-1))


class TestSelectSubset:
    def test_first(self):
        ts = TimeSeriesMatrix(np.arange(16.0).reshape(8, 2))
        sel = select_subset(ts, SelectionScheme.FIRST, 2)
        np.testing.assert_array_equal(sel.data, ts.data[:2])

    def test_uniform_example(self):
        ts = TimeSeriesMatrix(np.arange(14.0).reshape(7, 2))
        sel = select_subset(ts, SelectionScheme.UNIFORM, 3)
        np.testing.assert_array_equal(sel.data, ts.data[[0, 3, 6]])

    def test_uniform_matches_enumeration(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.integers(1, 40))
            m = int(rng.integers(1, n + 1))
            ts = TimeSeriesMatrix(rng.normal(size=(n, 2)))
            sel = select_subset(ts, "uniform", m)
            want = naive_uniform_indices(n, m)
            np.testing.assert_array_equal(sel.data, ts.data[want])

    def test_random_deterministic_and_distinct(self):
        ts = TimeSeriesMatrix(np.arange(16.0).reshape(8, 2))
        a = select_subset(ts, SelectionScheme.RANDOM, 3, seed=99)
        b = select_subset(ts, SelectionScheme.RANDOM, 3, seed=99)
        np.testing.assert_array_equal(a.data, b.data)
        rows = [tuple(r) for r in a.data]
        assert len(set(rows)) == 3

    def test_random_ascending_order(self):
        ts = TimeSeriesMatrix(np.arange(20.0).reshape(10, 2))
        sel = select_subset(ts, "random", 5, seed=1)
        first_col = sel.data[:, 0]
        assert np.all(np.diff(first_col) > 0)

    def test_bounds(self):
        ts = TimeSeriesMatrix(np.zeros((4, 3)))
        with pytest.raises(ValidationError):
            select_subset(ts, "first", 5)
        with pytest.raises(ValidationError):
            select_subset(ts, "first", 0)


class TestPartition:
    def test_exact_division(self):
        assert partition(12, 3) == [(1, 4), (5, 8), (9, 12)]

    def test_balanced_remainder(self):
        assert partition(10, 3) == [(1, 4), (5, 7), (8, 10)]

    def test_single_window(self):
        assert partition(8, 1) == [(1, 8)]

    def test_too_short(self):
        with pytest.raises(ValidationError):
            partition(5, 3)

    def test_disjoint_cover_balanced(self):
        rng = np.random.default_rng(10)
        for _ in range(300):
            length = int(rng.integers(2, 400))
            windows = int(rng.integers(1, max(2, length // 2 + 1)))
            if length < 2 * windows:
                continue
            ivs = partition(length, windows)
            assert ivs == naive_partition(length, windows)
            assert ivs[0][0] == 1 and ivs[-1][1] == length
            for (s1, e1), (s2, e2) in zip(ivs, ivs[1:]):
                assert s2 == e1 + 1
            widths = [e - s + 1 for s, e in ivs]
            assert max(widths) - min(widths) <= 1
            assert min(widths) >= 2


class TestEncodeCcf:
    def test_dimension_paper_configs(self):
        rng = np.random.default_rng(2)
        ts = rand_matrix(rng, 64, 40)
        cfg = EncoderConfig(groups=64, windows=1, lags=0)
        assert encode_ccf(ts, cfg).shape == (2016,)
        cfg16 = EncoderConfig(groups=64, windows=16, lags=0)
        ts_long = rand_matrix(rng, 64, 40)
        assert encode_ccf(ts_long, cfg16).shape == (32256,)

    def test_identical_rows_give_one(self):
        row = np.random.default_rng(4).normal(size=10)
        ts = TimeSeriesMatrix(np.stack([row, row]))
        cfg = EncoderConfig(groups=2, windows=1, lags=0)
        np.testing.assert_allclose(encode_ccf(ts, cfg), [1.0], atol=1e-12)

    def test_ungrouped_equivalence_with_direct_pairs(self):
        rng = np.random.default_rng(8)
        ts = rand_matrix(rng, 7, 25)
        cfg = EncoderConfig(groups=7, windows=1, lags=0)
        got = encode_ccf(ts, cfg)
        direct = [
            pearson(ts.data[a], ts.data[b])
            for a in range(7)
            for b in range(a + 1, 7)
        ]
        np.testing.assert_allclose(got, direct, atol=1e-12)

    def test_propagates_grouping_error(self):
        ts = TimeSeriesMatrix(np.zeros((5, 8)))
        with pytest.raises(ValidationError):
            encode_ccf(ts, EncoderConfig(groups=3, windows=1))


class TestEncodeAcf:
    def test_zero_lags_empty(self):
        ts = TimeSeriesMatrix(np.random.default_rng(0).normal(size=(3, 10)))
        cfg = EncoderConfig(groups=3, windows=1, lags=0)
        assert encode_acf(ts, cfg).shape == (0,)

    def test_length_law(self):
        ts = TimeSeriesMatrix(np.random.default_rng(1).normal(size=(9, 30)))
        cfg = EncoderConfig(groups=3, windows=1, lags=4, stride=2)
        assert encode_acf(ts, cfg).shape == (36,)

    def test_constant_rows_all_zero(self):
        ts = TimeSeriesMatrix(np.ones((4, 12)))
        cfg = EncoderConfig(groups=4, windows=1, lags=3)
        np.testing.assert_array_equal(encode_acf(ts, cfg), np.zeros(12))

    def test_overflow_lags_warn_and_zero_fill(self):
        ts = TimeSeriesMatrix(np.random.default_rng(2).normal(size=(2, 5)))
        cfg = EncoderConfig(groups=2, windows=1, lags=6, stride=1)
        with pytest.warns(ShortSeriesWarning):
            out = encode_acf(ts, cfg)
        grid = out.reshape(2, 6)
        np.testing.assert_array_equal(grid[:, 4:], np.zeros((2, 2)))
        assert np.any(grid[:, :4] != 0)


class TestEncodeTcf:
    def test_combined_layout_and_order(self):
        rng = np.random.default_rng(3)
        ts = rand_matrix(rng, 8, 20)
        cfg = EncoderConfig(groups=4, windows=2, lags=3)
        tcf = encode_tcf(ts, cfg)
        assert tcf.layout.ccf_length == ccf_length(4, 2) == 12
        assert tcf.layout.acf_length == acf_length(8, 3) == 24
        np.testing.assert_array_equal(tcf.combined[:12], tcf.ccf)
        np.testing.assert_array_equal(tcf.combined[12:], tcf.acf)

    def test_minimal_config(self):
        ts = TimeSeriesMatrix(np.random.default_rng(4).normal(size=(2, 6)))
        cfg = EncoderConfig(groups=2, windows=1, lags=0)
        assert encode_tcf(ts, cfg).combined.shape == (1,)

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        ts = rand_matrix(rng, 8, 30)
        cfg = EncoderConfig(groups=4, windows=3, lags=2, scheme="random", subset_size=4, seed=11)
        a = encode_tcf(ts, cfg).combined
        b = encode_tcf(ts, cfg).combined
        assert a.tobytes() == b.tobytes()

    def test_dimension_law_random_grid(self):
        rng = np.random.default_rng(6)
        for _ in range(60):
            n = int(rng.choice([2, 4, 6, 8, 12, 16, 24]))
            k = int(rng.integers(8, 40))
            lam = int(rng.choice([d for d in range(1, n + 1) if n % d == 0]))
            windows = int(rng.integers(1, max(2, (lam and n // lam * k) // 2)))
            windows = max(1, min(windows, (n // lam) * k // 2))
            lags = int(rng.integers(0, 5))
            cfg = EncoderConfig(groups=lam, windows=windows, lags=lags)
            ts = rand_matrix(rng, n, k)
            tcf = encode_tcf(ts, cfg)
            assert tcf.combined.shape == (tcf_length(n, lam, windows, lags),)

    def test_boundedness(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            ts = rand_matrix(rng, 8, 24, scale=rng.uniform(0.1, 100))
            cfg = EncoderConfig(groups=4, windows=2, lags=4)
            tcf = encode_tcf(ts, cfg)
            assert np.all(np.abs(tcf.combined) <= 1 + 1e-12)

    def test_affine_invariance_per_series(self):
        rng = np.random.default_rng(8)
        ts = rand_matrix(rng, 6, 30)
        cfg = EncoderConfig(groups=6, windows=1, lags=0)
        base = encode_ccf(ts, cfg)
        scaled = ts.data.copy()
        scaled[2] = 3.7 * scaled[2] + 11.0
        np.testing.assert_allclose(
            encode_ccf(TimeSeriesMatrix(scaled), cfg), base, atol=1e-9
        )


def test_full_encoder_matches_naive_reference():
    rng = np.random.default_rng(2024)
    schemes = ["group", "first", "random", "uniform"]
    for trial in range(60):
        n = int(rng.choice([2, 3, 4, 6, 8, 12, 16, 24, 32]))
        k = int(rng.integers(4, 51))
        scheme = schemes[trial % 4]
        if scheme == "group":
            count = int(rng.choice([d for d in range(1, n + 1) if n % d == 0]))
            row_len = (n // count) * k
        else:
            count = int(rng.integers(1, n + 1))
            row_len = k
        windows = int(rng.integers(1, max(2, row_len // 2) + 1))
        windows = min(windows, row_len // 2)
        if windows < 1:
            continue
        lags = int(rng.integers(0, 6))
        stride = int(rng.integers(1, 3))
        ts = rand_matrix(rng, n, k, scale=rng.uniform(0.5, 5))
        if scheme == "group":
            cfg = EncoderConfig(groups=count, windows=windows, lags=lags, stride=stride)
            rnd_idx = None
        else:
            cfg = EncoderConfig(
                groups=1, windows=windows, lags=lags, stride=stride,
                scheme=scheme, subset_size=count, seed=trial,
            )
            rnd_idx = None
            if scheme == "random":
                sel = select_subset(ts, "random", count, seed=trial)
                rnd_idx = [
                    int(np.flatnonzero((ts.data == row).all(axis=1))[0])
                    for row in sel.data
                ]
        with np.testing.suppress_warnings() as sup:
            sup.filter(ShortSeriesWarning)
            got = encode_tcf(ts, cfg).combined
        want = naive_encode(
            ts.data.tolist(), scheme, count, windows, lags, stride, rnd_idx
        )
        np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-9)
