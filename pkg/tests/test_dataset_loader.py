"""Tests for dataset loading, preprocessing and synthetic generation."""

import math
import os
import sys

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from exceptions import ConfigurationError, DatasetError
from connectors.dataset_loader import (
    Dataset,
    gen_synthetic,
    load_csv,
    load_dataset,
    load_libsvm,
    parse_gen_spec,
    preprocess,
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoaders:

    def test_csv(self, tmp_path):
        ds = load_csv(write(tmp_path, 'small.csv', '1,2\n3,4\n'))
        np.testing.assert_array_equal(ds.A, [[1.0], [3.0]])
        np.testing.assert_array_equal(ds.b, [2.0, 4.0])
        assert ds.name == 'small'
        assert not ds.scaled

    def test_libsvm_matches_csv(self, tmp_path):
        ds = load_libsvm(write(tmp_path, 'small.svm', '2 1:1\n4 1:3\n'))
        np.testing.assert_array_equal(ds.A, [[1.0], [3.0]])
        np.testing.assert_array_equal(ds.b, [2.0, 4.0])

    def test_libsvm_missing_entries_are_zero(self, tmp_path):
        ds = load_libsvm(write(tmp_path, 'sparse.libsvm', '1 3:2.5\n-1 1:1 2:4\n'))
        np.testing.assert_array_equal(ds.A, [[0.0, 0.0, 2.5], [1.0, 4.0, 0.0]])
        np.testing.assert_array_equal(ds.b, [1.0, -1.0])

    @pytest.mark.parametrize('name', ['empty.csv', 'empty.svm'])
    def test_empty_file(self, tmp_path, name):
        with pytest.raises(DatasetError):
            load_dataset(write(tmp_path, name, ''))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError):
            load_dataset(tmp_path / 'absent.csv')

    def test_csv_inconsistent_width(self, tmp_path):
        with pytest.raises(DatasetError) as exc:
            load_csv(write(tmp_path, 'wide.csv', '1,2\n3,4,5\n'))
        assert exc.value.line == 2

    def test_csv_non_numeric(self, tmp_path):
        with pytest.raises(DatasetError) as exc:
            load_csv(write(tmp_path, 'text.csv', '1,2\n3,x\n'))
        assert exc.value.line == 2

    def test_csv_single_column(self, tmp_path):
        with pytest.raises(DatasetError):
            load_csv(write(tmp_path, 'narrow.csv', '1\n2\n'))

    def test_libsvm_malformed_entry(self, tmp_path):
        with pytest.raises(DatasetError) as exc:
            load_libsvm(write(tmp_path, 'bad.svm', '2 1:1\n4 a:3\n'))
        assert exc.value.line == 2
        assert 'line 2' in str(exc.value)

    def test_libsvm_zero_index(self, tmp_path):
        with pytest.raises(DatasetError) as exc:
            load_libsvm(write(tmp_path, 'zero.svm', '2 0:1\n'))
        assert exc.value.line == 1

    def test_dispatch_by_extension(self, tmp_path):
        assert load_dataset(write(tmp_path, 'a.csv', '1,2\n')).A.shape == (1, 1)
        assert load_dataset(write(tmp_path, 'a.libsvm', '2 2:1\n')).A.shape == (1, 2)


class TestPreprocess:

    def test_scaling_example(self):
        scaled, nu = preprocess(Dataset(np.array([[3.0], [4.0]]), np.array([0.0, 5.0]), 'toy'), 0.1)
        np.testing.assert_allclose(scaled.A[:, 0], [0.6, 0.8])
        np.testing.assert_allclose(scaled.b, [0.0, 1.0])
        assert nu == pytest.approx(0.08)
        assert scaled.scaled

    def test_unit_columns_after_scaling(self):
        scaled, _ = preprocess(gen_synthetic(50, 100, seed=4))
        np.testing.assert_allclose(np.linalg.norm(scaled.A, axis=0), 1.0, atol=1e-12)
        assert np.linalg.norm(scaled.b) == pytest.approx(1.0, abs=1e-12)

    def test_idempotent(self):
        once, nu_once = preprocess(gen_synthetic(20, 10, seed=2))
        twice, nu_twice = preprocess(once)
        np.testing.assert_allclose(twice.A, once.A, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(twice.b, once.b, rtol=1e-12, atol=1e-15)
        assert nu_twice == pytest.approx(nu_once, rel=1e-12)

    def test_zero_columns_are_flagged(self):
        A = np.array([[1.0, 0.0], [1.0, 0.0]])
        scaled, _ = preprocess(Dataset(A, np.array([1.0, 2.0]), 'zero-col'))
        assert scaled.zero_columns == [1]
        np.testing.assert_array_equal(scaled.A[:, 1], [0.0, 0.0])
        assert scaled.to_dict()['zero_columns'] == [1]

    def test_all_zero_design(self):
        with pytest.raises(DatasetError):
            preprocess(Dataset(np.zeros((3, 2)), np.ones(3), 'zeros'))

    def test_zero_target(self):
        with pytest.raises(DatasetError):
            preprocess(Dataset(np.ones((3, 2)), np.zeros(3), 'no-signal'))


class TestSynthetic:

    def test_deterministic(self):
        first = gen_synthetic(30, 12, 0.25, 0.1, seed=9)
        second = gen_synthetic(30, 12, 0.25, 0.1, seed=9)
        np.testing.assert_array_equal(first.A, second.A)
        np.testing.assert_array_equal(first.b, second.b)
        assert first.name == second.name
        assert not np.array_equal(first.A, gen_synthetic(30, 12, 0.25, 0.1, seed=10).A)

    def test_sparsity(self):
        ds = gen_synthetic(30, 20, sparsity=0.12, noise_sd=0.0, seed=1)
        assert np.count_nonzero(ds.ground_truth) == math.ceil(0.12 * 20)
        np.testing.assert_allclose(ds.b, ds.A @ ds.ground_truth)

    def test_one_by_one(self):
        ds = gen_synthetic(1, 1, sparsity=1.0, seed=0)
        assert (ds.n, ds.d) == (1, 1)

    @pytest.mark.parametrize('kwargs', [
        {'n': 0, 'd': 3},
        {'n': 3, 'd': 3, 'sparsity': 1.5},
        {'n': 3, 'd': 3, 'noise_sd': -1.0},
    ])
    def test_invalid_arguments(self, kwargs):
        with pytest.raises(ConfigurationError):
            gen_synthetic(**kwargs)

    def test_parse_gen_spec(self):
        assert parse_gen_spec('50x100') == (50, 100)
        assert parse_gen_spec(' 7X3 ') == (7, 3)
        with pytest.raises(ConfigurationError):
            parse_gen_spec('50-100')
