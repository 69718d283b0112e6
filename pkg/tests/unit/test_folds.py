"""
Unit tests for seeded k-fold splitting.
"""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skinnet.data import kfold_split
from skinnet.exceptions import DataError


@pytest.mark.unit
class TestKFoldSplit:
    """Test fold laws."""

    @settings(max_examples=100, deadline=None)
    @given(n=st.integers(5, 400), seed=st.integers(0, 10_000))
    def test_partition_laws(self, n, seed):
        ids = [f"img_{i}" for i in range(n)]

        split = kfold_split(ids, 5, seed)

        flat = [sid for fold in split.folds for sid in fold]
        assert sorted(flat) == sorted(ids)
        assert len(set(flat)) == n
        sizes = [len(f) for f in split.folds]
        assert max(sizes) - min(sizes) <= 1
        assert sizes == sorted(sizes, reverse=True)

    def test_train_val_complement(self):
        ids = [str(i) for i in range(12)]
        split = kfold_split(ids, 5, seed=1)

        for i in range(5):
            train, val = split.train_val(i)
            assert set(train) | set(val) == set(ids)
            assert not set(train) & set(val)

    def test_seed_controls_order(self):
        ids = [str(i) for i in range(20)]

        assert kfold_split(ids, 5, seed=3) == kfold_split(ids, 5, seed=3)
        assert kfold_split(ids, 5, seed=3).folds != kfold_split(ids, 5, seed=4).folds

    def test_too_few_samples(self):
        with pytest.raises(DataError):
            kfold_split(["a", "b", "c"], 5)

    def test_duplicate_ids(self):
        with pytest.raises(DataError):
            kfold_split(["a", "a", "b", "c", "d"], 2)

    def test_fold_index_out_of_range(self):
        split = kfold_split([str(i) for i in range(10)], 5)

        with pytest.raises(DataError):
            split.train_val(5)

    @settings(max_examples=150, deadline=None)
    @given(data=st.data(), k=st.sampled_from([2, 5, 10]), seed=st.integers(0, 10_000))
    def test_partition_laws_for_common_k(self, data, k, seed):
        n = data.draw(st.integers(k, 500), label="n")
        ids = [f"img_{i}" for i in range(n)]

        split = kfold_split(ids, k, seed)

        assert len(split.folds) == k
        flat = [sid for fold in split.folds for sid in fold]
        assert sorted(flat) == sorted(ids)
        sizes = [len(f) for f in split.folds]
        assert max(sizes) - min(sizes) <= 1
        for i in range(k):
            train, val = split.train_val(i)
            assert sorted(train + val) == sorted(ids)
