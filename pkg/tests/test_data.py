import pytest
import numpy as np
from graphmine import data
from graphmine.errors import (MissingColumn,
                              DuplicateColumn,
                              InvalidDataset,
                              ParseError,
                              EmptyDataset,
                              UnreadableData,
                              InvalidSpec,
                              SingleClassError)


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_load_csv(tiny_csv):
    ds = data.load_csv(tiny_csv)
    assert ds.n_samples == 3
    assert ds.n_features == 2
    assert ds.feature_names == ("f1", "f2")
    assert ds.labels.tolist() == [0, 0, 1]
    assert ds.features.tolist() == [[1, 2], [3, 4], [5, 6]]
    assert ds.source == tiny_csv


def test_load_csv_drop_columns(tiny_csv):
    ds = data.load_csv(tiny_csv, drop_columns=["f2"])
    assert ds.n_features == 1
    assert ds.features[:, 0].tolist() == [1, 3, 5]


def test_load_csv_scientific_and_order(tmp_path):
    path = write(tmp_path, "Class,b,a\n1,1e-3,-2.5E2\n0,0.1,3\n")
    ds = data.load_csv(path)
    assert ds.feature_names == ("b", "a")
    assert ds.features[0].tolist() == [0.001, -250.0]
    assert ds.labels.tolist() == [1, 0]


def test_load_csv_parse_error(tmp_path):
    path = write(tmp_path, "f1,f2,Class\nabc,2,0\n3,4,1\n")
    with pytest.raises(ParseError) as ex:
        data.load_csv(path)
    assert ex.value.row == 2
    assert ex.value.column == "f1"
    assert ex.value.value == "abc"


def test_load_csv_parse_error_row_major(tmp_path):
    path = write(tmp_path, "f1,f2,Class\n1,2,0\n3,x,1\ny,4,0\n")
    with pytest.raises(ParseError) as ex:
        data.load_csv(path)
    assert (ex.value.row, ex.value.column) == (3, "f2")


def test_load_csv_non_finite_and_bad_label(tmp_path):
    with pytest.raises(ParseError):
        data.load_csv(write(tmp_path, "f1,Class\ninf,0\n1,1\n"))
    with pytest.raises(ParseError) as ex:
        data.load_csv(write(tmp_path, "f1,Class\n1,2\n", name="e.csv"))
    assert ex.value.column == "Class"
    with pytest.raises(ParseError):
        data.load_csv(write(tmp_path, "f1,Class\n,0\n", name="f.csv"))


def test_load_csv_missing_column(tiny_csv):
    with pytest.raises(MissingColumn) as ex:
        data.load_csv(tiny_csv, label_column="label")
    assert ex.value.column == "label"
    with pytest.raises(MissingColumn):
        data.load_csv(tiny_csv, drop_columns=["Time"])


def test_load_csv_empty(tmp_path):
    with pytest.raises(EmptyDataset):
        data.load_csv(write(tmp_path, "f1,f2,Class\n"))
    with pytest.raises(EmptyDataset):
        data.load_csv(write(tmp_path, "", name="e.csv"))


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(UnreadableData):
        data.load_csv(str(tmp_path / "nope.csv"))


def test_write_csv_round_trip(tmp_path, small_dataset):
    path = str(tmp_path / "out" / "synth.csv")
    data.write_csv(small_dataset, path)
    ds = data.load_csv(path)
    assert np.array_equal(ds.features, small_dataset.features)
    assert np.array_equal(ds.labels, small_dataset.labels)
    assert ds.feature_names == small_dataset.feature_names
    assert data.dataset_digest(ds) == data.dataset_digest(small_dataset)


def test_write_csv_quotes_names(tmp_path):
    ds = data.Dataset(features=[[1.5, -2.0], [0.25, 3.0]], labels=[0, 1],
                      feature_names=["amount, usd", 'say "hi"'])
    path = str(tmp_path / "quoted.csv")
    data.write_csv(ds, path)
    back = data.load_csv(path)
    assert back.feature_names == ("amount, usd", 'say "hi"')
    assert np.array_equal(back.features, ds.features)
    assert back.labels.tolist() == [0, 1]


def test_write_csv_label_clash(tmp_path):
    ds = data.Dataset(features=[[1.0], [2.0]], labels=[0, 1], feature_names=["Class"])
    with pytest.raises(DuplicateColumn):
        data.write_csv(ds, str(tmp_path / "clash.csv"))


def test_load_csv_ragged_row(tmp_path):
    path = write(tmp_path, "f1,f2,Class\n1,2,0\n1,2,3,4,5\n")
    with pytest.raises(UnreadableData) as info:
        data.load_csv(path)
    assert info.value.exit_status == 3


def test_load_csv_duplicate_header(tmp_path):
    path = write(tmp_path, "f1,f1,Class\n1,2,0\n3,4,1\n")
    with pytest.raises(DuplicateColumn) as info:
        data.load_csv(path)
    assert info.value.column == "f1"


def test_standardize_examples():
    ds = data.Dataset(features=[[1, 5, 0], [3, 5, 0], [2, 5, 4]], labels=[0, 0, 1],
                      feature_names=["a", "b", "c"])
    z, model = data.standardize(ds)
    assert z.features[:, 1].tolist() == [0, 0, 0]
    assert model.constant.tolist() == [False, True, False]
    assert z.features[:, 2] == pytest.approx([-0.7071068, -0.7071068, 1.4142136], abs=1e-6)

    two = data.Dataset(features=[[1], [3]], labels=[0, 1], feature_names=["a"])
    assert data.standardize(two)[0].features[:, 0].tolist() == [-1.0, 1.0]


def test_standardize_properties(small_dataset):
    z, model = data.standardize(small_dataset)
    assert np.allclose(z.features.mean(axis=0), 0, atol=1e-9)
    assert np.allclose(z.features.std(axis=0), 1, atol=1e-9)
    assert np.allclose(model.invert(z.features), small_dataset.features, rtol=1e-9, atol=1e-12)
    again, _ = data.standardize(z)
    assert np.allclose(again.features, z.features, atol=1e-9)


def test_standardize_needs_two_rows():
    with pytest.raises(EmptyDataset):
        data.standardize(data.Dataset(features=[[1.0]], labels=[1], feature_names=["a"]))


def test_dataset_invariants():
    with pytest.raises(InvalidDataset):
        data.Dataset(features=[[1.0]], labels=[2], feature_names=["a"])
    with pytest.raises(DuplicateColumn):
        data.Dataset(features=[[1.0, 2.0]], labels=[0], feature_names=["a", "a"])
    with pytest.raises(InvalidDataset):
        data.Dataset(features=[[np.nan]], labels=[0], feature_names=["a"])
    with pytest.raises(InvalidDataset):
        data.Dataset(features=[[1.0], [2.0]], labels=[0], feature_names=["a"])
    with pytest.raises(InvalidDataset) as info:
        data.Dataset(features=[[1.0]], labels=[0], feature_names=["a", "b"])
    assert info.value.code == "InvalidDataset"
    assert info.value.exit_status == 3
    with pytest.raises(EmptyDataset):
        data.Dataset(features=np.zeros((0, 2)), labels=[], feature_names=["a", "b"])
    ds = data.Dataset(features=[[1.0]], labels=[0], feature_names=["a"])
    with pytest.raises(ValueError):
        ds.features[0, 0] = 2.0


def test_generate_synthetic():
    spec = data.SyntheticSpec(n_samples=100, n_features=5, minority_fraction=0.1,
                              n_minority_clusters=2, seed=7)
    ds = data.generate_synthetic(spec)
    assert ds.n_samples == 100
    assert ds.n_features == 5
    assert int(ds.labels.sum()) == 10
    assert ds.source == "synthetic:%s" % spec.digest()
    assert sorted(set(ds.clusters[ds.labels == 1].tolist())) == [0, 1]
    assert set(ds.clusters[ds.labels == 0].tolist()) == {-1}

    again = data.generate_synthetic(spec)
    assert np.array_equal(again.features, ds.features)
    assert np.array_equal(again.labels, ds.labels)

    other = data.generate_synthetic(data.SyntheticSpec(100, 5, 0.1, 2, seed=8))
    assert not np.array_equal(other.features, ds.features)


def test_synthetic_minority_rounding():
    assert data.SyntheticSpec(10, 2, 0.25).n_minority == 3
    assert data.SyntheticSpec(2000, 20, 0.05).n_minority == 100


def test_generate_synthetic_invalid():
    with pytest.raises(InvalidSpec):
        data.generate_synthetic(data.SyntheticSpec(100, 5, 0.6))
    with pytest.raises(InvalidSpec):
        data.generate_synthetic(data.SyntheticSpec(100, 5, 0.01, n_minority_clusters=3))
    with pytest.raises(InvalidSpec):
        data.generate_synthetic(data.SyntheticSpec(100, 5, 0.1, cluster_spread=0))


def test_class_partition():
    majority, minority = data.class_partition(np.array([0, 0, 1]))
    assert majority.tolist() == [0, 1]
    assert minority.tolist() == [2]
    majority, minority = data.class_partition(np.array([0, 1, 0, 1]))
    assert majority.tolist() == [0, 2]
    assert minority.tolist() == [1, 3]
    with pytest.raises(SingleClassError):
        data.class_partition(np.array([1, 1]))


def test_class_partition_dataset(small_dataset):
    majority, minority = data.class_partition(small_dataset)
    assert len(majority) + len(minority) == small_dataset.n_samples
    assert not set(majority.tolist()) & set(minority.tolist())
