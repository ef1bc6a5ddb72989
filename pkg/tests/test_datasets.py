"""
test_datasets.py

Tests for dataset files, splits and the stochastic block model generator
"""
import json
import os

import numpy as np
import pytest
from click.testing import CliRunner
from numpy.testing import assert_allclose, assert_array_equal


@pytest.fixture
def two_node_files(tmpdir):
    graph_path = os.path.join(tmpdir, "graph.txt")
    with open(graph_path, "w") as f:
        f.write("nodes 2\n0\t1\n")
    features_path = os.path.join(tmpdir, "features.csv")
    with open(features_path, "w") as f:
        f.write("1.0,0.0\n0.0,1.0\n")
    labels_path = os.path.join(tmpdir, "labels.csv")
    with open(labels_path, "w") as f:
        f.write("node_id,class_id\n0,0\n1,1\n")
    return dict(graph_path=graph_path, features_path=features_path, labels_path=labels_path)


@pytest.fixture
def cora_sized_labels():
    """2708 nodes over 7 classes, enough of each for 20 training nodes"""
    return np.arange(2708) % 7


def test_load_dataset(two_node_files):
    from graphdistill.datasets import load_dataset

    dataset = load_dataset(**two_node_files)
    assert_array_equal(dataset.graph.csr_offsets, [0, 1, 2])
    assert_array_equal(dataset.graph.csr_cols, [1, 0])
    assert dataset.n_classes == 2
    assert dataset.split is None


def test_read_graph_edgeless(tmpdir):
    from graphdistill.datasets import read_graph

    path = os.path.join(tmpdir, "empty.txt")
    with open(path, "w") as f:
        f.write("nodes 3\n")
    graph = read_graph(path)
    assert graph.n == 3
    assert graph.n_edges == 0


def test_read_graph_reports_line(tmpdir):
    from graphdistill.datasets import read_graph
    from graphdistill.errors import ParseError

    path = os.path.join(tmpdir, "graph.txt")
    with open(path, "w") as f:
        f.write("nodes 3\n0\t1\n1 two\n")
    with pytest.raises(ParseError) as excinfo:
        read_graph(path)
    assert excinfo.value.line_number == 3
    assert ":3:" in str(excinfo.value)


def test_read_graph_out_of_range(tmpdir):
    from graphdistill.datasets import read_graph
    from graphdistill.errors import ValidationError

    path = os.path.join(tmpdir, "graph.txt")
    with open(path, "w") as f:
        f.write("nodes 2\n0\t2\n")
    with pytest.raises(ValidationError):
        read_graph(path)


def test_labels_class_id_equal_to_declared_count(two_node_files):
    from graphdistill.datasets import load_dataset
    from graphdistill.errors import ValidationError

    with pytest.raises(ValidationError):
        load_dataset(**two_node_files, n_classes=1)


def test_feature_count_mismatch(tmpdir, two_node_files):
    from graphdistill.datasets import load_dataset
    from graphdistill.errors import ValidationError

    with open(two_node_files["features_path"], "w") as f:
        f.write("1.0,0.0\n")
    with pytest.raises(ValidationError):
        load_dataset(**two_node_files)


def test_features_binary_format(tmpdir):
    from graphdistill.datasets import read_features, write_features
    from graphdistill.errors import FormatError

    path = os.path.join(tmpdir, "features.gdfm")
    features = np.array([[0.5, -1.0, 2.0], [0.0, 0.25, 4.0]])
    write_features(features, path)
    assert_allclose(read_features(path), features)

    with open(path, "rb") as f:
        payload = f.read()
    with open(path, "wb") as f:
        f.write(payload[:-4])
    with pytest.raises(FormatError, match="format error"):
        read_features(path)

    with open(path, "wb") as f:
        f.write(b"NOPE" + payload[4:])
    with pytest.raises(FormatError):
        read_features(path)


def test_save_and_load_directory(tmpdir, preset_dataset):
    from graphdistill.datasets import load_dataset_dir, save_dataset

    directory = os.path.join(tmpdir, "saved")
    save_dataset(preset_dataset, directory)
    loaded = load_dataset_dir(directory)
    assert loaded.n == preset_dataset.n
    assert loaded.graph.n_edges == preset_dataset.graph.n_edges
    assert_array_equal(loaded.labels, preset_dataset.labels)
    assert_array_equal(loaded.split.train, preset_dataset.split.train)
    # Features are stored as float32
    assert_allclose(loaded.features.data, preset_dataset.features.data, rtol=1e-6)


def test_split_validation():
    from graphdistill.datasets import Split
    from graphdistill.errors import ValidationError

    with pytest.raises(ValidationError):
        Split(train=[0, 1], val=[1], test=[2]).validate(3)
    with pytest.raises(ValidationError):
        Split(train=[0], val=[1], test=[5]).validate(3)
    with pytest.raises(ValidationError):
        Split.from_dict({"train": [0], "val": [1]})


def test_transductive_split_sizes(cora_sized_labels):
    from graphdistill.datasets import make_transductive_split

    split = make_transductive_split(cora_sized_labels, per_class_train=20, seed=0)
    assert split.train.size == 140
    assert split.val.size == 500
    assert split.test.size == 1000
    assert_array_equal(np.bincount(cora_sized_labels[split.train]), [20] * 7)
    split.validate(cora_sized_labels.size)


def test_transductive_split_seeds(cora_sized_labels):
    from graphdistill.datasets import make_transductive_split

    first = make_transductive_split(cora_sized_labels, seed=3)
    again = make_transductive_split(cora_sized_labels, seed=3)
    other = make_transductive_split(cora_sized_labels, seed=4)
    assert_array_equal(first.train, again.train)
    assert_array_equal(first.test, again.test)
    assert not np.array_equal(first.train, other.train)


def test_transductive_split_insufficient_nodes():
    from graphdistill.datasets import make_transductive_split
    from graphdistill.errors import ConfigError

    with pytest.raises(ConfigError):
        make_transductive_split(np.array([0, 0, 1]), per_class_train=2)


@pytest.mark.parametrize("rate, expected", [(0.01, 27), (0.03, 81)])
def test_label_rate_split(cora_sized_labels, rate, expected):
    from graphdistill.datasets import make_label_rate_split

    split = make_label_rate_split(cora_sized_labels, rate, seed=0)
    assert split.train.size == expected
    split.validate(cora_sized_labels.size)


def test_label_rate_split_missing_classes():
    from graphdistill.datasets import make_label_rate_split, missing_train_classes

    labels = np.array([0] * 95 + [1] * 5)
    split = make_label_rate_split(labels, 0.01, seed=0, val_size=10)
    assert split.train.size == 1
    missing = missing_train_classes(labels, split, 2)
    assert len(missing) == 1


def test_label_rate_split_empty_train():
    from graphdistill.datasets import make_label_rate_split
    from graphdistill.errors import ConfigError

    with pytest.raises(ConfigError):
        make_label_rate_split(np.zeros(10, dtype=int), 0.01)


def test_inductive_split():
    from graphdistill.datasets import Dataset, generate_sbm, make_inductive_split

    dataset = generate_sbm(2, 50, 0.3, 0.05, 4, 0.1, seed=1)
    split = make_inductive_split(dataset.labels, 0.2, seed=0, per_class_train=5, val_size=10)
    assert split.unseen.size == 20
    assert_array_equal(split.test, split.unseen)
    inductive = Dataset(
        dataset.graph, dataset.features, dataset.labels, dataset.n_classes, split
    )
    observed = inductive.subset(split.observed)
    assert observed.n == 80
    # Edges of the observed subgraph only join observed nodes
    original_ids = split.observed[observed.graph.edges()]
    assert not np.isin(original_ids, split.unseen).any()


def test_inductive_split_degenerate():
    from graphdistill.datasets import make_inductive_split
    from graphdistill.errors import ConfigError

    with pytest.raises(ConfigError):
        make_inductive_split(np.zeros(100, dtype=int), 0.001)
    with pytest.raises(ConfigError):
        make_inductive_split(np.zeros(100, dtype=int), 0.0)


def test_generate_sbm_extremes():
    from graphdistill.datasets import generate_sbm

    dataset = generate_sbm(2, 3, 1.0, 0.0, 2, 0.0, seed=0)
    edges = {tuple(e) for e in dataset.graph.edges().tolist()}
    assert edges == {(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)}
    assert_array_equal(dataset.features.data, np.eye(2)[dataset.labels])


def test_generate_sbm_invalid_probabilities():
    from graphdistill.datasets import generate_sbm
    from graphdistill.errors import ConfigError

    with pytest.raises(ConfigError):
        generate_sbm(2, 3, 0.1, 0.5, 2, 0.0)


def test_make_preset(preset_dataset):
    assert preset_dataset.name == "sbm-test"
    assert preset_dataset.n == 200
    assert preset_dataset.n_classes == 4
    assert preset_dataset.feature_dim == 16
    assert preset_dataset.split.train.size == 40
    assert preset_dataset.split.val.size == 40
    assert preset_dataset.split.test.size == 120


def test_dataset_statistics(preset_dataset):
    from graphdistill.datasets import dataset_statistics

    stats = dataset_statistics(preset_dataset)
    assert stats["nodes"] == 200
    assert stats["train_per_class"] == [10, 10, 10, 10]
    assert stats["label_rate"] == pytest.approx(0.2)


def test_prepare_dataset_modes():
    from graphdistill.datasets import prepare_dataset

    kept = prepare_dataset("preset:test", seed=0)
    assert kept.split.train.size == 40
    rate = prepare_dataset(
        "preset:test", seed=0, split_mode="label-rate", label_rate=0.1, val_size=20
    )
    assert rate.split.train.size == 20
    inductive = prepare_dataset(
        "preset:test", seed=0, split_mode="inductive", per_class_train=5, val_size=20
    )
    assert inductive.split.inductive
    assert inductive.split.unseen.size == 40


def test_dataset_cli_synth_and_validate(tmpdir):
    from graphdistill.datasets import cli

    directory = os.path.join(tmpdir, "synth")
    runner = CliRunner()
    result = runner.invoke(cli, ["synth", directory, "--preset", "test"])
    assert result.exit_code == 0
    assert "Wrote 200 nodes" in result.output

    result = runner.invoke(cli, ["validate", directory, "--json"])
    assert result.exit_code == 0
    stats = json.loads(result.output)
    assert stats["classes"] == 4
    assert stats["train"] == 40


def test_dataset_cli_validate_bad_labels(tmpdir, dataset_dir):
    from graphdistill.datasets import cli

    runner = CliRunner()
    result = runner.invoke(cli, ["validate", dataset_dir, "--classes", "2"])
    assert result.exit_code == 2


@pytest.mark.parametrize("which", ["features_path", "labels_path"])
def test_empty_csv_is_a_parse_error(two_node_files, which):
    from graphdistill.datasets import load_dataset
    from graphdistill.errors import ParseError

    with open(two_node_files[which], "w"):
        pass
    with pytest.raises(ParseError, match=":1:"):
        load_dataset(**two_node_files)


@pytest.mark.parametrize("mode", ["transductive", "inductive", "label-rate"])
def test_prepare_dataset_uses_preset_split_sizes(mode):
    from graphdistill.datasets import prepare_dataset

    prepared = prepare_dataset("preset:test", seed=1, split_mode=mode, label_rate=0.1)
    assert prepared.split.val.size == 40
    if mode != "label-rate":
        assert prepared.split.train.size == 40
    if mode == "inductive":
        assert prepared.split.unseen.size == 40
