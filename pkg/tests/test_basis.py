"""Tests for basis construction, sparse evaluation and persistence."""

import numpy as np
import numpy.testing as nptest
import pytest

from wavelet_rl.basis import (
    UPPER_STATE_BOUND,
    BasisSet,
    FunctionKind,
    FunctionSpec,
    build_decoupled,
    build_fixed_coupled,
    build_fourier,
    support_volume
)
from wavelet_rl.exceptions import (
    BasisSizeError,
    DimensionMismatchError,
    FeatureKindError,
    StructuralEditError,
    UnknownFeatureError
)
from wavelet_rl.wavelet import WaveletAtom

COUNT_CASES = [
    (1, 0, 2), (0, 0, 1), (0, 2, 2), (1, 1, 2), (2, 2, 2),
    (2, 0, 1), (2, 1, 3), (0, 3, 2), (1, 2, 1), (2, 3, 1),
    (1, 0, 4), (0, 1, 4), (2, 0, 3), (1, 3, 2), (0, 2, 3),
    (2, 2, 1), (1, 1, 3), (0, 0, 4), (2, 1, 2), (1, 2, 3),
]


def random_weights(basis, rng):
    basis.weights = rng.normal(size=basis.weights.shape)
    return basis


class TestCounts:
    @pytest.mark.parametrize('order,scale,d', COUNT_CASES)
    def test_coupled_and_decoupled_sizes(self, order, scale, d):
        width = order + 2 ** scale
        assert len(build_fixed_coupled(d, order, scale)) == width ** d
        assert len(build_decoupled(d, order, scale)) == width * d

    @pytest.mark.parametrize('order,d', [(0, 1), (3, 2), (5, 2), (2, 4)])
    def test_fourier_size(self, order, d):
        assert len(build_fourier(d, order)) == (order + 1) ** d

    def test_two_dimensional_hat_example(self):
        basis = build_fixed_coupled(2, 1, 0)
        assert len(basis) == 4
        first = basis.function(basis.ids[0])
        assert [a.translation for a in first.atoms] == [0, 0]

    def test_translation_order(self):
        basis = build_decoupled(1, 2, 1)
        assert [basis.function(i).atoms[0].translation for i in basis.ids] == [0, 1, -1, -2]

    def test_size_guard(self):
        with pytest.raises(BasisSizeError):
            build_fixed_coupled(4, 2, 6, max_size=1000)
        with pytest.raises(BasisSizeError):
            build_fourier(4, 9, max_size=1000)

    def test_weights_track_size(self):
        basis = build_decoupled(2, 1, 1, n_actions=3)
        assert basis.weights.shape == (3, len(basis))
        assert basis.traces.shape == (3, len(basis))


class TestEvaluation:
    @pytest.mark.parametrize('builder', [
        lambda: build_fixed_coupled(2, 2, 2, n_actions=3),
        lambda: build_decoupled(4, 1, 2, n_actions=3),
        lambda: build_fourier(2, 3, n_actions=3),
    ])
    def test_sparse_matches_dense(self, builder, rng):
        basis = random_weights(builder(), rng)
        for s in rng.random((200, basis.d)):
            dense = basis.dense_features(s)
            positions, values = basis.active(s)
            sparse = np.zeros(len(basis))
            sparse[positions] = values
            nptest.assert_allclose(sparse, dense, rtol=0, atol=1e-12)
            nptest.assert_allclose(basis.q_values(s), basis.weights.dot(dense), rtol=1e-12, atol=1e-12)

    def test_dense_matches_function_value(self, rng):
        basis = build_fixed_coupled(2, 2, 1)
        s = rng.random(2)
        dense = basis.dense_features(s)
        expected = [f.value(s) for f in basis.functions]
        nptest.assert_allclose(dense, expected, rtol=1e-12)

    def test_order_zero_is_a_tiling(self, rng):
        basis = build_fixed_coupled(2, 0, 2)
        states = np.vstack([rng.random((500, 2)), [[0.0, 0.0], [1.0, 1.0], [0.25, 0.75]]])
        for s in states:
            positions, values = basis.active(s)
            assert positions.size == 1
            assert values[0] == pytest.approx(4.0)

    def test_states_are_clamped(self):
        basis = build_fixed_coupled(2, 0, 1)
        nptest.assert_array_equal(basis.dense_features([1.0, 1.0]), basis.dense_features([UPPER_STATE_BOUND] * 2))
        nptest.assert_array_equal(basis.dense_features([-0.5, 1.5]), basis.dense_features([0.0, UPPER_STATE_BOUND]))

    def test_active_features_lists_ids(self):
        basis = build_decoupled(2, 0, 1)
        ids = [fid for fid, _ in basis.active_features([0.1, 0.9])]
        assert sorted(ids) == [0, 3]

    def test_dimension_mismatch(self):
        basis = build_decoupled(2, 1, 1)
        with pytest.raises(DimensionMismatchError):
            basis.active([0.5])
        with pytest.raises(DimensionMismatchError):
            basis.add_function(FunctionKind.WAVELET, atoms=[WaveletAtom(1, 0, 0, 2)])

    def test_value_is_weighted_sum(self, rng):
        basis = random_weights(build_fixed_coupled(2, 1, 1, n_actions=2), rng)
        s = rng.random(2)
        assert basis.value(s, 1) == pytest.approx(float(basis.weights[1].dot(basis.dense_features(s))))

    def test_fourier_alpha_scale(self):
        basis = build_fourier(2, 4)
        scale = basis.feature_alpha_scale()
        coeffs = [f.coeffs for f in basis.functions]
        assert scale[coeffs.index((0, 0))] == 1.0
        assert scale[coeffs.index((3, 4))] == pytest.approx(0.2)
        nptest.assert_array_equal(basis.feature_alpha_scale(fourier_scaling=False), 1.0)

    def test_wavelet_alpha_scale_is_one(self):
        nptest.assert_array_equal(build_decoupled(2, 2, 2).feature_alpha_scale(), 1.0)


class TestSupportVolume:
    def test_product_of_clipped_lengths(self):
        basis = build_fixed_coupled(2, 2, 1)
        fid = basis.find(('wavelet', (WaveletAtom(2, 1, 0, 0), WaveletAtom(2, 1, -2, 1))))
        assert support_volume(basis.function(fid)) == pytest.approx(1.0 * 0.5)

    def test_fourier_has_no_support_volume(self):
        basis = build_fourier(2, 1)
        with pytest.raises(FeatureKindError):
            support_volume(basis.functions[0])


class TestStructuralBookkeeping:
    def test_duplicate_function_rejected(self):
        basis = build_decoupled(1, 1, 0)
        with pytest.raises(StructuralEditError):
            basis.add_function(FunctionKind.WAVELET, atoms=[WaveletAtom(1, 0, 0, 0)])

    def test_unknown_id(self):
        basis = build_decoupled(1, 1, 0)
        with pytest.raises(UnknownFeatureError):
            basis.remove_function(99)

    def test_ids_are_never_reused(self):
        basis = build_decoupled(1, 1, 0)
        last = basis.ids[-1]
        basis.remove_function(last)
        new_id = basis.add_function(FunctionKind.WAVELET, atoms=[WaveletAtom(1, 1, 0, 0)])
        assert new_id == last + 1
        assert len(basis) == basis.weights.shape[1]

    def test_cap_on_add(self):
        basis = BasisSet(1, max_size=1)
        basis.add_function(FunctionKind.WAVELET, atoms=[WaveletAtom(0, 0, 0, 0)])
        with pytest.raises(BasisSizeError):
            basis.add_function(FunctionKind.WAVELET, atoms=[WaveletAtom(0, 1, 0, 0)])

    def test_extend_appends_in_order(self):
        basis = BasisSet(1, n_actions=2)
        block = np.array([[1.0, 2.0], [3.0, 4.0]])
        new_ids = basis.extend(
            [FunctionSpec(FunctionKind.WAVELET, atoms=(WaveletAtom(1, 0, k, 0),)) for k in (0, -1)],
            weights=block,
        )
        assert new_ids == [0, 1] == basis.ids
        nptest.assert_array_equal(basis.weights, block)
        assert basis.traces.shape == (2, 2)
        assert not basis.traces.any()

    def test_failed_extend_keeps_shapes_consistent(self):
        basis = BasisSet(1, n_actions=3)
        specs = [FunctionSpec(FunctionKind.WAVELET, atoms=(WaveletAtom(0, 1, k, 0),)) for k in (0, 1, 0)]
        with pytest.raises(StructuralEditError):
            basis.extend(specs)
        assert basis.ids == [0, 1]
        assert basis.weights.shape == basis.traces.shape == (3, 2)
        assert basis.active([0.75])[0].tolist() == [1]

    def test_large_coupled_basis_builds(self):
        basis = build_fixed_coupled(2, 0, 8, n_actions=3)
        assert len(basis) == 256 ** 2
        assert basis.weights.shape == basis.traces.shape == (3, 256 ** 2)
        assert basis.ids[-1] == 256 ** 2 - 1

    def test_copy_is_independent(self, rng):
        basis = random_weights(build_decoupled(2, 1, 1), rng)
        clone = basis.copy()
        clone.weights[:] = 0.0
        clone.remove_function(clone.ids[0])
        assert len(basis) == len(clone) + 1
        assert np.any(basis.weights != 0.0)


class TestPersistence:
    def test_lines_round_trip_preserves_values(self, rng):
        basis = random_weights(build_fixed_coupled(2, 2, 1, n_actions=3), rng)
        basis.remove_function(basis.ids[4])
        restored = BasisSet.from_lines(basis.to_lines())
        assert restored.ids == basis.ids
        assert restored.next_id == basis.next_id
        for s in rng.random((50, 2)):
            nptest.assert_array_equal(restored.q_values(s), basis.q_values(s))

    def test_dump_and_load(self, tmp_path, rng):
        basis = random_weights(build_fourier(2, 2, n_actions=3), rng)
        path = tmp_path / 'basis.txt'
        basis.dump(path)
        assert path.read_text().startswith('# basis d=2 actions=3 next_id=9')
        restored = BasisSet.load(path)
        nptest.assert_array_equal(restored.weights, basis.weights)
        assert [f.coeffs for f in restored.functions] == [f.coeffs for f in basis.functions]

    def test_missing_header(self):
        with pytest.raises(ValueError):
            BasisSet.from_lines(['0\twavelet\t(0,0,0,0)\t0.0'])

    def test_leading_metadata_line_is_skipped(self, tmp_path, rng):
        basis = random_weights(build_decoupled(2, 1, 1, n_actions=3), rng)
        path = tmp_path / 'basis.txt'
        basis.dump(path, metadata='# {"config_hash": "abc123", "seed": 4}')
        lines = path.read_text().splitlines()
        assert lines[0] == '# {"config_hash": "abc123", "seed": 4}'
        assert lines[1].startswith('# basis d=2 actions=3')
        restored = BasisSet.load(path)
        assert restored.ids == basis.ids
        nptest.assert_array_equal(restored.weights, basis.weights)

    def test_data_before_header_is_rejected(self):
        lines = build_decoupled(1, 0, 0).to_lines()
        with pytest.raises(ValueError):
            BasisSet.from_lines(lines[1:] + lines[:1])
