import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fewshot_subspaces.dataset import (
    LabeledDataset,
    SplitSpec,
    load_feature_csv,
    split_per_class,
    validate_nonnegative,
    write_feature_csv,
)
from fewshot_subspaces.errors import FormatError, InsufficientClassSize, NegativeEntry


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def make_dataset(rng, classes, per_class, dims, spread=1.0):
    feats = []
    labels = []
    for j in range(classes):
        feats.append(rng.normal(loc=j * spread, size=(per_class, dims)))
        labels += [j] * per_class
    return LabeledDataset(
        features=np.vstack(feats),
        labels=np.array(labels),
        class_count=classes,
    )


def test_load_two_row_file(tmp_path):
    path = write(tmp_path, "label,f0,f1,f2\na,1,2,3\nb,4,5,6\n")
    d = load_feature_csv(path)
    assert d.n_samples == 2
    assert d.n_features == 3
    assert d.class_count == 2
    assert d.label_names == ("a", "b")
    assert np.allclose(d.features, [[1, 2, 3], [4, 5, 6]])


def test_load_class_order_is_first_appearance(tmp_path):
    path = write(tmp_path, "label,f0\nzebra,1\napple,2\nzebra,3\n")
    d = load_feature_csv(path)
    assert d.label_names == ("zebra", "apple")
    assert list(d.labels) == [0, 1, 0]


def test_load_supports_table1_sized_split(tmp_path):
    # 4 classes x 200 rows covers the 160 train + 40 test per-class split.
    rng = np.random.default_rng(0)
    lines = ["label,f0,f1"]
    for j in range(4):
        for _ in range(200):
            x, y = rng.normal(size=2)
            lines.append(f"c{j},{x},{y}")
    d = load_feature_csv(write(tmp_path, "\n".join(lines) + "\n"))
    assert d.n_samples == 800
    assert d.class_count == 4
    split = split_per_class(d, SplitSpec(160, 40, seed=9))
    assert split.train.n_samples == 640
    assert split.test.n_samples == 160


def test_load_ragged_row_reports_line(tmp_path):
    path = write(tmp_path, "label,f0,f1,f2\na,1,2,3\nb,4,5\n")
    with pytest.raises(FormatError) as err:
        load_feature_csv(path)
    assert err.value.row == 3


def test_load_non_numeric_cell(tmp_path):
    path = write(tmp_path, "label,f0\na,1\nb,oops\n")
    with pytest.raises(FormatError) as err:
        load_feature_csv(path)
    assert err.value.row == 3


def test_load_non_finite_cell(tmp_path):
    path = write(tmp_path, "label,f0\na,1\nb,nan\n")
    with pytest.raises(FormatError):
        load_feature_csv(path)


def test_load_empty_file(tmp_path):
    with pytest.raises(FormatError):
        load_feature_csv(write(tmp_path, ""))


def test_load_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_feature_csv(tmp_path / "absent.csv")


def test_load_accepts_crlf(tmp_path):
    path = write(tmp_path, "label,f0\r\na,1.5\r\nb,2.5e-1\r\n")
    d = load_feature_csv(path)
    assert np.allclose(d.features.ravel(), [1.5, 0.25])


def test_load_skips_comment_lines(tmp_path):
    path = write(
        tmp_path,
        "# extractor: test fixture\n# seed: 7\nlabel,f0\na,1\nb,2\n",
    )
    d = load_feature_csv(path)
    assert d.n_samples == 2
    assert d.label_names == ("a", "b")


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(21)
    d = make_dataset(rng, 3, 4, 5)
    path = tmp_path / "out.csv"
    write_feature_csv(d, path)
    back = load_feature_csv(path)
    assert np.array_equal(back.features, d.features)
    assert np.array_equal(back.labels, d.labels)


def test_split_sizes_match_bloodmnist_row():
    rng = np.random.default_rng(1)
    d = make_dataset(rng, 8, 100, 6)
    split = split_per_class(d, SplitSpec(75, 25, seed=4))
    assert split.train.n_samples == 600
    assert split.test.n_samples == 200
    assert np.array_equal(np.bincount(split.train.labels), [75] * 8)
    assert np.array_equal(np.bincount(split.test.labels), [25] * 8)


def test_split_too_small_class():
    rng = np.random.default_rng(2)
    d = make_dataset(rng, 2, 100, 3)
    with pytest.raises(InsufficientClassSize) as err:
        split_per_class(d, SplitSpec(300, 10, seed=0))
    assert err.value.have == 100
    assert err.value.need == 310


def test_split_deterministic():
    rng = np.random.default_rng(3)
    d = make_dataset(rng, 3, 30, 4)
    spec = SplitSpec(10, 5, seed=77)
    a = split_per_class(d, spec)
    b = split_per_class(d, spec)
    assert np.array_equal(a.train_indices, b.train_indices)
    assert np.array_equal(a.test_indices, b.test_indices)
    assert np.array_equal(a.train.features, b.train.features)


def test_split_disjoint_within_class():
    rng = np.random.default_rng(4)
    d = make_dataset(rng, 4, 25, 3)
    split = split_per_class(d, SplitSpec(12, 6, seed=5))
    assert not set(split.train_indices) & set(split.test_indices)


def test_split_depends_only_on_within_class_order():
    # Moving whole class blocks around must not change per-class membership.
    rng = np.random.default_rng(6)
    d = make_dataset(rng, 3, 20, 4)
    order = np.concatenate([np.arange(40, 60), np.arange(0, 20), np.arange(20, 40)])
    permuted = LabeledDataset(
        features=d.features[order],
        labels=d.labels[order],
        class_count=3,
    )
    spec = SplitSpec(8, 4, seed=123)
    rows_a = {
        tuple(sorted(map(tuple, split_per_class(d, spec).train.features[
            split_per_class(d, spec).train.labels == j
        ])))
        for j in range(3)
    }
    rows_b = {
        tuple(sorted(map(tuple, split_per_class(permuted, spec).train.features[
            split_per_class(permuted, spec).train.labels == j
        ])))
        for j in range(3)
    }
    assert rows_a == rows_b


@settings(deadline=None, max_examples=50)
@given(
    st.integers(min_value=1, max_value=8),
    st.integers(min_value=1, max_value=8),
    st.integers(min_value=0, max_value=2**32 - 1),
)
def test_split_union_has_no_duplicates(train_n, test_n, seed):
    rng = np.random.default_rng(99)
    d = make_dataset(rng, 3, 20, 2)
    split = split_per_class(d, SplitSpec(train_n, test_n, seed=seed))
    for j in range(3):
        chosen = np.concatenate(
            [
                split.train_indices[split.train.labels == j],
                split.test_indices[split.test.labels == j],
            ]
        )
        assert len(chosen) == train_n + test_n
        assert len(set(chosen)) == train_n + test_n


def test_validate_nonnegative_identity():
    rng = np.random.default_rng(8)
    d = make_dataset(rng, 2, 5, 3)
    d = LabeledDataset(np.abs(d.features), d.labels, 2)
    assert validate_nonnegative(d, clamp=False) is d


def test_validate_nonnegative_rejects():
    d = LabeledDataset(np.array([[1.0, -0.5], [1.0, 1.0]]), [0, 1], 2)
    with pytest.raises(NegativeEntry) as err:
        validate_nonnegative(d, clamp=False)
    assert (err.value.row, err.value.col) == (0, 1)
    assert err.value.value == -0.5


def test_validate_nonnegative_clamps_roundoff():
    d = LabeledDataset(np.array([[1.0, -1e-12], [1.0, 1.0]]), [0, 1], 2)
    fixed = validate_nonnegative(d, clamp=True)
    assert fixed.features[0, 1] == 0.0
    assert fixed.clamped_entries == 1


def test_validate_nonnegative_clamp_still_rejects_large():
    d = LabeledDataset(np.array([[1.0, -1e-3], [1.0, 1.0]]), [0, 1], 2)
    with pytest.raises(NegativeEntry):
        validate_nonnegative(d, clamp=True)
