"""
datasets.py

Dataset ingestion and writing in the on-disk formats, split construction
(transductive, label-rate, inductive) and the stochastic block model
generator used for desk-scale data
"""
import json
import os
from dataclasses import dataclass, replace

import click
import networkx as nx
import numpy as np
import pandas as pd

from graphdistill.constants_harness import (
    DEFAULT_PER_CLASS_TRAIN,
    DEFAULT_TEST_SIZE,
    DEFAULT_UNSEEN_FRACTION,
    DEFAULT_VAL_SIZE,
    FEATURES_CSV_FILENAME,
    FEATURES_FILENAME,
    FEATURES_MAGIC,
    FEATURES_VERSION,
    GRAPH_FILENAME,
    LABELS_FILENAME,
    PRESET_SPLITS,
    SBM_PRESETS,
    SPLIT_FILENAME,
)
from graphdistill.errors import (
    ConfigError,
    FormatError,
    ParseError,
    ValidationError,
    exit_on_error,
)
from graphdistill.graph import Graph, induced_subgraph
from graphdistill.log_utils import get_logger
from graphdistill.numerics import Tensor, make_rng
from graphdistill.os_utils import maybe_make_parent_dir, sanitize_path

logger = get_logger(__file__)

SPLIT_KEYS = ("train", "val", "test", "observed", "unseen")
FEATURES_HEADER = np.dtype(
    [("magic", "S4"), ("version", "<u4"), ("rows", "<u8"), ("cols", "<u8")]
)


def _index_array(values):
    if values is None:
        return None
    array = np.asarray(values, dtype=np.int64).reshape(-1)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Split:
    """Named node index sets; observed/unseen exist only for inductive runs"""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    observed: np.ndarray = None
    unseen: np.ndarray = None

    def __post_init__(self):
        for key in SPLIT_KEYS:
            object.__setattr__(self, key, _index_array(getattr(self, key)))

    @property
    def inductive(self):
        return self.unseen is not None

    def validate(self, n):
        for key in SPLIT_KEYS:
            indices = getattr(self, key)
            if indices is None:
                continue
            if indices.size and (indices.min() < 0 or indices.max() >= n):
                raise ValidationError(f"Split {key!r} has an index outside [0, {n})")
            if np.unique(indices).size != indices.size:
                raise ValidationError(f"Split {key!r} has repeated indices")
        for a, b in (("train", "val"), ("train", "test"), ("val", "test")):
            if np.intersect1d(getattr(self, a), getattr(self, b)).size:
                raise ValidationError(f"Splits {a!r} and {b!r} overlap")
        if (self.observed is None) != (self.unseen is None):
            raise ValidationError("'observed' and 'unseen' must be given together")
        if self.inductive:
            if np.intersect1d(self.observed, self.unseen).size:
                raise ValidationError("Splits 'observed' and 'unseen' overlap")
            if np.setdiff1d(self.test, self.unseen).size:
                raise ValidationError("Inductive test nodes must all be unseen")
            training_side = np.concatenate([self.train, self.val])
            if np.setdiff1d(training_side, self.observed).size:
                raise ValidationError("Inductive train/val nodes must be observed")

    def to_dict(self):
        return {
            key: getattr(self, key).tolist()
            for key in SPLIT_KEYS
            if getattr(self, key) is not None
        }

    @classmethod
    def from_dict(cls, data):
        missing = [key for key in ("train", "val", "test") if key not in data]
        if missing:
            raise ValidationError(f"Split is missing {', '.join(missing)}")
        return cls(**{key: data.get(key) for key in SPLIT_KEYS})


@dataclass(frozen=True, eq=False)
class Dataset:
    graph: Graph
    features: Tensor
    labels: np.ndarray
    n_classes: int
    split: Split = None
    name: str = "dataset"

    def __post_init__(self):
        if not isinstance(self.features, Tensor):
            object.__setattr__(self, "features", Tensor(self.features))
        object.__setattr__(self, "labels", _index_array(self.labels))
        self.validate()

    @property
    def n(self):
        return self.graph.n

    @property
    def feature_dim(self):
        return self.features.shape[1]

    def validate(self):
        n = self.graph.n
        if self.features.data.ndim != 2 or self.features.shape[0] != n:
            raise ValidationError(
                f"Feature matrix has shape {self.features.shape}, expected {n} rows"
            )
        if self.labels.size != n:
            raise ValidationError(f"{self.labels.size} labels for {n} nodes")
        if self.labels.size and (
            self.labels.min() < 0 or self.labels.max() >= self.n_classes
        ):
            raise ValidationError(
                f"Class ids must lie in [0, {self.n_classes}), "
                f"found {self.labels.min()}..{self.labels.max()}"
            )
        if self.split is not None:
            self.split.validate(n)

    def with_split(self, split):
        return replace(self, split=split)

    def subset(self, nodes):
        """Induced sub-dataset on ``nodes`` with every index remapped

        Split indices outside ``nodes`` are dropped; observed/unseen are not
        carried over.
        """
        subgraph, nodes = induced_subgraph(self.graph, nodes)
        split = None
        if self.split is not None:
            lookup = np.full(self.n, -1, dtype=np.int64)
            lookup[nodes] = np.arange(nodes.size)

            def remap(indices):
                local = lookup[indices]
                return local[local >= 0]

            split = Split(
                train=remap(self.split.train),
                val=remap(self.split.val),
                test=remap(self.split.test),
            )
        return Dataset(
            graph=subgraph,
            features=self.features.data[nodes],
            labels=self.labels[nodes],
            n_classes=self.n_classes,
            split=split,
            name=self.name,
        )


def read_graph(path):
    """Edge list with a ``nodes <N>`` header, one tab-separated edge per line"""
    edges = []
    n = None
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            if n is None:
                fields = line.split()
                if len(fields) != 2 or fields[0] != "nodes" or not fields[1].isdigit():
                    raise ParseError(
                        f"expected header 'nodes <N>', got {line!r}", path, line_number
                    )
                n = int(fields[1])
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ParseError(f"expected 'src<TAB>dst', got {line!r}", path, line_number)
            try:
                src, dst = int(fields[0]), int(fields[1])
            except ValueError:
                raise ParseError(f"non-integer node id in {line!r}", path, line_number)
            if not (0 <= src < n and 0 <= dst < n):
                raise ValidationError(
                    f"{path}:{line_number}: node id out of range for {n} nodes"
                )
            edges.append((src, dst))
    if n is None:
        raise ParseError("missing 'nodes <N>' header", path, 1)
    return Graph.from_edges(n, edges)


def write_graph(graph, path):
    maybe_make_parent_dir(path)
    logger.info(f"Writing graph with {graph.n} nodes to {path}")
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"nodes {graph.n}\n")
        for src, dst in graph.edges():
            f.write(f"{src}\t{dst}\n")


def read_features(path):
    """GDFM binary feature matrix, or one CSV row per node for ``.csv`` paths"""
    if path.endswith(".csv"):
        return _read_features_csv(path)
    with open(path, "rb") as f:
        payload = f.read()
    if len(payload) < FEATURES_HEADER.itemsize:
        raise FormatError(f"{path} is too short to hold a feature header")
    header = np.frombuffer(payload, dtype=FEATURES_HEADER, count=1)[0]
    if header["magic"] != FEATURES_MAGIC:
        raise FormatError(f"{path} does not start with {FEATURES_MAGIC!r}")
    if header["version"] != FEATURES_VERSION:
        raise FormatError(
            f"{path} has version {header['version']}, expected {FEATURES_VERSION}"
        )
    rows, cols = int(header["rows"]), int(header["cols"])
    expected = FEATURES_HEADER.itemsize + rows * cols * 4
    if len(payload) != expected:
        raise FormatError(
            f"{path} holds {len(payload)} bytes, expected {expected} "
            f"for a {rows}x{cols} matrix"
        )
    values = np.frombuffer(
        payload, dtype="<f4", count=rows * cols, offset=FEATURES_HEADER.itemsize
    )
    return values.astype(np.float64).reshape(rows, cols)


def _read_features_csv(path):
    try:
        table = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise ParseError("feature file is empty", path, 1)
    numeric = table.apply(pd.to_numeric, errors="coerce")
    bad_rows = np.flatnonzero(numeric.isna().any(axis=1).to_numpy())
    if bad_rows.size:
        raise ParseError("non-numeric feature value", path, int(bad_rows[0]) + 1)
    return numeric.to_numpy(dtype=np.float64)


def write_features(features, path):
    maybe_make_parent_dir(path)
    features = np.asarray(features)
    logger.info(f"Writing {features.shape[0]}x{features.shape[1]} features to {path}")
    if path.endswith(".csv"):
        pd.DataFrame(features).to_csv(path, header=False, index=False)
        return
    header = np.zeros(1, dtype=FEATURES_HEADER)
    header["magic"] = FEATURES_MAGIC
    header["version"] = FEATURES_VERSION
    header["rows"], header["cols"] = features.shape
    with open(path, "wb") as f:
        f.write(header.tobytes())
        f.write(np.ascontiguousarray(features, dtype="<f4").tobytes())


def read_labels(path, n_nodes, n_classes=None):
    """``node_id,class_id`` CSV; every node must be labelled exactly once

    Returns
    -------
    labels : numpy.ndarray
    n_classes : int
        As given, or one more than the largest class id
    """
    try:
        table = pd.read_csv(path, dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise ParseError("expected header 'node_id,class_id', file is empty", path, 1)
    if list(table.columns) != ["node_id", "class_id"]:
        raise ParseError("expected header 'node_id,class_id'", path, 1)
    numeric = table.apply(pd.to_numeric, errors="coerce")
    bad_rows = np.flatnonzero(numeric.isna().any(axis=1).to_numpy())
    if bad_rows.size:
        # Line 1 is the header
        raise ParseError("non-integer label entry", path, int(bad_rows[0]) + 2)
    node_ids = numeric["node_id"].to_numpy(dtype=np.int64)
    class_ids = numeric["class_id"].to_numpy(dtype=np.int64)
    if node_ids.size != n_nodes:
        raise ValidationError(f"{path} has {node_ids.size} labels for {n_nodes} nodes")
    if node_ids.size and (node_ids.min() < 0 or node_ids.max() >= n_nodes):
        raise ValidationError(f"{path} has a node id outside [0, {n_nodes})")
    if np.unique(node_ids).size != node_ids.size:
        raise ValidationError(f"{path} labels some node more than once")
    if class_ids.size and class_ids.min() < 0:
        raise ValidationError(f"{path} has a negative class id")
    if n_classes is None:
        n_classes = int(class_ids.max()) + 1 if class_ids.size else 0
    elif class_ids.size and class_ids.max() >= n_classes:
        raise ValidationError(
            f"{path} has class id {class_ids.max()}, expected ids below {n_classes}"
        )
    labels = np.empty(n_nodes, dtype=np.int64)
    labels[node_ids] = class_ids
    return labels, n_classes


def write_labels(labels, path):
    maybe_make_parent_dir(path)
    logger.info(f"Writing {len(labels)} labels to {path}")
    pd.DataFrame({"node_id": np.arange(len(labels)), "class_id": labels}).to_csv(
        path, index=False
    )


def read_split(path):
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as error:
        raise ParseError(error.msg, path, error.lineno)
    if not isinstance(data, dict):
        raise ValidationError(f"{path} must hold a JSON object")
    return Split.from_dict(data)


def write_split(split, path):
    maybe_make_parent_dir(path)
    logger.info(f"Writing split to {path}")
    with open(path, "w") as f:
        json.dump(split.to_dict(), f)


def load_dataset(graph_path, features_path, labels_path, split_path=None, n_classes=None):
    """Read and validate a dataset from its four files

    Parameters
    ----------
    graph_path : str
        Edge list; edges are symmetrized and deduplicated
    features_path : str
        GDFM binary or ``.csv`` feature matrix
    labels_path : str
        ``node_id,class_id`` CSV
    split_path : str, optional
        JSON split file
    n_classes : int, optional
        Declared class count; class ids must be below it

    Returns
    -------
    dataset : Dataset
    """
    graph = read_graph(graph_path)
    features = read_features(features_path)
    if features.shape[0] != graph.n:
        raise ValidationError(
            f"{features_path} has {features.shape[0]} rows, graph has {graph.n} nodes"
        )
    labels, n_classes = read_labels(labels_path, graph.n, n_classes)
    split = read_split(split_path) if split_path else None
    name = os.path.basename(os.path.dirname(sanitize_path(graph_path)))
    return Dataset(graph, features, labels, n_classes, split, name=name)


def dataset_paths(directory):
    """The files of a dataset directory; features may be GDFM or CSV"""
    directory = sanitize_path(directory)
    features = os.path.join(directory, FEATURES_FILENAME)
    if not os.path.exists(features) and os.path.exists(
        os.path.join(directory, FEATURES_CSV_FILENAME)
    ):
        features = os.path.join(directory, FEATURES_CSV_FILENAME)
    split = os.path.join(directory, SPLIT_FILENAME)
    return dict(
        graph_path=os.path.join(directory, GRAPH_FILENAME),
        features_path=features,
        labels_path=os.path.join(directory, LABELS_FILENAME),
        split_path=split if os.path.exists(split) else None,
    )


def load_dataset_dir(directory, n_classes=None):
    return load_dataset(**dataset_paths(directory), n_classes=n_classes)


def save_dataset(dataset, directory):
    """Write every file of ``dataset`` into ``directory``; returns the paths"""
    paths = dataset_paths(directory)
    paths["features_path"] = os.path.join(sanitize_path(directory), FEATURES_FILENAME)
    write_graph(dataset.graph, paths["graph_path"])
    write_features(dataset.features.data, paths["features_path"])
    write_labels(dataset.labels, paths["labels_path"])
    if dataset.split is not None:
        paths["split_path"] = os.path.join(sanitize_path(directory), SPLIT_FILENAME)
        write_split(dataset.split, paths["split_path"])
    return paths


def _round_half_up(x):
    return int(np.floor(x + 0.5))


def _sorted(indices):
    return np.sort(np.asarray(indices, dtype=np.int64))


def _class_balanced_train(labels, candidates, per_class_train, rng):
    """Pick ``per_class_train`` nodes of every class among ``candidates``"""
    train = []
    for c in np.unique(labels):
        members = candidates[labels[candidates] == c]
        if members.size < per_class_train:
            raise ConfigError(
                f"Class {c} has {members.size} candidate nodes, "
                f"need {per_class_train} for training"
            )
        train.append(rng.permutation(members)[:per_class_train])
    return np.concatenate(train) if train else np.empty(0, dtype=np.int64)


def _take_val_test(remaining, val_size, test_size, rng):
    remaining = rng.permutation(remaining)
    if val_size > remaining.size:
        raise ConfigError(
            f"Need {val_size} validation nodes, only {remaining.size} left"
        )
    val = remaining[:val_size]
    rest = remaining[val_size:]
    if test_size is None:
        return val, rest
    if test_size > rest.size:
        raise ConfigError(f"Need {test_size} test nodes, only {rest.size} left")
    return val, rest[:test_size]


def make_transductive_split(
    labels,
    per_class_train=DEFAULT_PER_CLASS_TRAIN,
    val_size=DEFAULT_VAL_SIZE,
    test_size=DEFAULT_TEST_SIZE,
    seed=0,
):
    """Class-balanced train set, then random val and test sets

    ``test_size=None`` puts every remaining node in the test set.
    """
    labels = np.asarray(labels)
    rng = make_rng(seed, "split")
    candidates = np.arange(labels.size)
    train = _class_balanced_train(labels, candidates, per_class_train, rng)
    remaining = np.setdiff1d(candidates, train)
    val, test = _take_val_test(remaining, val_size, test_size, rng)
    return Split(train=_sorted(train), val=_sorted(val), test=_sorted(test))


def make_label_rate_split(labels, rate, seed=0, val_size=DEFAULT_VAL_SIZE, test_size=None):
    """Uniformly sampled train set of round(rate * N) nodes

    Classes may be missing from the train set at low rates; see
    ``missing_train_classes``.
    """
    labels = np.asarray(labels)
    if not 0 < rate < 1:
        raise ConfigError(f"label rate must be in (0, 1), got {rate}")
    n_train = _round_half_up(rate * labels.size)
    if n_train == 0:
        raise ConfigError(f"label rate {rate} leaves an empty train set")
    rng = make_rng(seed, "split")
    order = rng.permutation(labels.size)
    train = order[:n_train]
    val, test = _take_val_test(order[n_train:], val_size, test_size, rng)
    return Split(train=_sorted(train), val=_sorted(val), test=_sorted(test))


def missing_train_classes(labels, split, n_classes):
    """Classes without a single training node"""
    present = np.unique(np.asarray(labels)[split.train])
    return sorted(set(range(n_classes)) - set(present.tolist()))


def make_inductive_split(
    labels,
    unseen_fraction=DEFAULT_UNSEEN_FRACTION,
    seed=0,
    per_class_train=DEFAULT_PER_CLASS_TRAIN,
    val_size=DEFAULT_VAL_SIZE,
):
    """Hold out round(unseen_fraction * N) nodes; they form the test set

    Train and val are drawn from the observed nodes only.
    """
    labels = np.asarray(labels)
    if not 0 < unseen_fraction < 1:
        raise ConfigError(f"unseen fraction must be in (0, 1), got {unseen_fraction}")
    n = labels.size
    n_unseen = _round_half_up(unseen_fraction * n)
    if n_unseen == 0 or n_unseen == n:
        raise ConfigError(
            f"unseen fraction {unseen_fraction} on {n} nodes gives a degenerate split"
        )
    rng = make_rng(seed, "split")
    order = rng.permutation(n)
    unseen = _sorted(order[:n_unseen])
    observed = _sorted(order[n_unseen:])
    train = _class_balanced_train(labels, observed, per_class_train, rng)
    val, _ = _take_val_test(np.setdiff1d(observed, train), val_size, 0, rng)
    return Split(
        train=_sorted(train),
        val=_sorted(val),
        test=unseen,
        observed=observed,
        unseen=unseen,
    )


def generate_sbm(
    classes, nodes_per_class, p_in, p_out, feature_dim, feature_noise, seed=0
):
    """Stochastic block model graph with noisy one-hot class-centroid features

    Returns
    -------
    dataset : Dataset
        Labels are the block ids; no split attached
    """
    if not 0 <= p_out < p_in <= 1:
        raise ConfigError(f"Need 0 <= p_out < p_in <= 1, got p_in={p_in}, p_out={p_out}")
    if classes < 1 or nodes_per_class < 1:
        raise ConfigError("Need at least one class and one node per class")
    if feature_dim < classes:
        raise ConfigError(
            f"feature_dim={feature_dim} cannot hold one-hot centroids for {classes} classes"
        )
    if feature_noise < 0:
        raise ConfigError(f"feature_noise must be nonnegative, got {feature_noise}")

    rng = make_rng(seed, "sbm")
    sizes = [nodes_per_class] * classes
    probabilities = np.full((classes, classes), p_out)
    np.fill_diagonal(probabilities, p_in)
    nx_graph = nx.stochastic_block_model(
        sizes, probabilities.tolist(), seed=int(rng.integers(2 ** 31))
    )
    n = classes * nodes_per_class
    graph = Graph.from_edges(n, np.array(list(nx_graph.edges()), dtype=np.int64))

    labels = np.repeat(np.arange(classes), nodes_per_class)
    centroids = np.eye(classes, feature_dim)
    features = centroids[labels] + feature_noise * rng.standard_normal((n, feature_dim))
    logger.debug(f"Generated SBM with {n} nodes and {graph.n_edges} edges")
    return Dataset(graph, features, labels, classes, name="sbm")


def make_preset(name, seed=0):
    """Synthetic dataset preset with its split attached"""
    try:
        params = SBM_PRESETS[name]
    except KeyError:
        raise ConfigError(f"Unknown preset {name!r}, choose from {sorted(SBM_PRESETS)}")
    dataset = generate_sbm(**params, seed=seed)
    split = make_transductive_split(dataset.labels, seed=seed, **PRESET_SPLITS[name])
    return replace(dataset.with_split(split), name=f"sbm-{name}")


def dataset_statistics(dataset):
    """Node/edge/class/feature counts and split sizes"""
    stats = {
        "name": dataset.name,
        "nodes": dataset.n,
        "edges": dataset.graph.n_edges,
        "classes": dataset.n_classes,
        "features": dataset.feature_dim,
        "isolated_nodes": int(np.sum(dataset.graph.degrees == 0)),
    }
    split = dataset.split
    if split is not None:
        for key in SPLIT_KEYS:
            indices = getattr(split, key)
            if indices is not None:
                stats[key] = int(indices.size)
        stats["label_rate"] = split.train.size / dataset.n if dataset.n else 0.0
        counts = np.bincount(dataset.labels[split.train], minlength=dataset.n_classes)
        stats["train_per_class"] = counts.tolist()
    return stats


def load_or_make(dataset, seed=0, n_classes=None):
    """``preset:<name>`` builds a synthetic preset; anything else is a directory"""
    if dataset.startswith("preset:"):
        return make_preset(dataset.split(":", 1)[1], seed=seed)
    return load_dataset_dir(dataset, n_classes=n_classes)


SPLIT_MODES = ("file", "transductive", "inductive", "label-rate")


def split_defaults(dataset):
    if dataset.startswith("preset:"):
        name = dataset.split(":", 1)[1]
        if name in PRESET_SPLITS:
            return PRESET_SPLITS[name]
    return dict(
        per_class_train=DEFAULT_PER_CLASS_TRAIN,
        val_size=DEFAULT_VAL_SIZE,
        test_size=DEFAULT_TEST_SIZE,
    )


def prepare_dataset(
    dataset,
    seed=0,
    split_mode=None,
    label_rate=None,
    unseen_fraction=DEFAULT_UNSEEN_FRACTION,
    per_class_train=None,
    val_size=None,
    test_size=None,
    n_classes=None,
):
    """Load a dataset and attach the split a run asks for

    ``split_mode`` None keeps the split shipped with the dataset, or builds a
    transductive one when there is none. Split sizes left as None follow the
    preset's conventions, or the Planetoid defaults for directories.
    """
    data = load_or_make(dataset, seed=seed, n_classes=n_classes)
    sizes = split_defaults(dataset)
    per_class_train = sizes["per_class_train"] if per_class_train is None else per_class_train
    val_size = sizes["val_size"] if val_size is None else val_size
    test_size = sizes["test_size"] if test_size is None else test_size
    if split_mode is None:
        split_mode = "file" if data.split is not None else "transductive"
    if split_mode == "file":
        if data.split is None:
            raise ConfigError(f"{dataset} has no split file")
        return data
    labels = data.labels
    if split_mode == "transductive":
        split = make_transductive_split(labels, per_class_train, val_size, test_size, seed)
    elif split_mode == "inductive":
        split = make_inductive_split(labels, unseen_fraction, seed, per_class_train, val_size)
    elif split_mode == "label-rate":
        if label_rate is None:
            raise ConfigError("the label-rate split needs a label rate")
        split = make_label_rate_split(labels, label_rate, seed, val_size)
    else:
        raise ConfigError(f"Unknown split mode {split_mode!r}, choose from {SPLIT_MODES}")
    return data.with_split(split)


def check_dataset_argument(ctx, param, value):
    """Click callback: a dataset is ``preset:<name>`` or an existing directory"""
    if value.startswith("preset:"):
        if value.split(":", 1)[1] not in SBM_PRESETS:
            raise click.BadParameter(f"unknown preset, choose from {sorted(SBM_PRESETS)}")
        return value
    if not os.path.isdir(value):
        raise click.BadParameter(f"dataset directory {value!r} does not exist")
    return value


def dataset_options(func):
    """Options shared by every command that loads a dataset"""
    options = [
        click.argument("dataset", callback=check_dataset_argument),
        click.option(
            "--split-mode",
            type=click.Choice(SPLIT_MODES),
            default=None,
            help="Split to train on; defaults to the dataset's split file",
        ),
        click.option("--label-rate", type=float, default=None),
        click.option("--unseen-fraction", type=float, default=DEFAULT_UNSEEN_FRACTION),
        click.option(
            "--per-class-train",
            type=int,
            default=None,
            help=f"Training nodes per class (preset convention or {DEFAULT_PER_CLASS_TRAIN})",
        ),
        click.option(
            "--val-size",
            type=int,
            default=None,
            help=f"Validation nodes (preset convention or {DEFAULT_VAL_SIZE})",
        ),
        click.option(
            "--test-size",
            type=int,
            default=None,
            help=f"Test nodes (preset convention or {DEFAULT_TEST_SIZE})",
        ),
        click.option("--classes", "n_classes", type=int, default=None),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group(name="dataset")
def cli():
    """Validate dataset files or synthesize stochastic block model datasets"""
    pass


@cli.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--classes", type=int, default=None, help="Declared class count")
@click.option("--json", "json_output", is_flag=True, help="Print statistics as JSON")
@exit_on_error
def validate(directory, classes, json_output):
    """Check a dataset directory and print its statistics"""
    dataset = load_dataset_dir(directory, n_classes=classes)
    stats = dataset_statistics(dataset)
    if json_output:
        click.echo(json.dumps(stats))
        return
    for key, value in stats.items():
        click.echo(f"{key}\t{value}")


@cli.command()
@click.argument("directory", type=click.Path(file_okay=False))
@click.option(
    "--preset",
    type=click.Choice(sorted(SBM_PRESETS)),
    default=None,
    help="Named preset; flags below are ignored when given",
)
@click.option("--classes", type=int, default=4)
@click.option("--nodes-per-class", type=int, default=50)
@click.option("--p-in", type=float, default=0.1)
@click.option("--p-out", type=float, default=0.01)
@click.option("--feature-dim", type=int, default=16)
@click.option("--feature-noise", type=float, default=0.5)
@click.option("--per-class-train", type=int, default=10)
@click.option("--val-size", type=int, default=40)
@click.option("--seed", type=int, default=0)
@exit_on_error
def synth(
    directory,
    preset,
    classes,
    nodes_per_class,
    p_in,
    p_out,
    feature_dim,
    feature_noise,
    per_class_train,
    val_size,
    seed,
):
    """Write a stochastic block model dataset into DIRECTORY"""
    if preset is not None:
        dataset = make_preset(preset, seed=seed)
    else:
        dataset = generate_sbm(
            classes, nodes_per_class, p_in, p_out, feature_dim, feature_noise, seed
        )
        split = make_transductive_split(
            dataset.labels, per_class_train, val_size, test_size=None, seed=seed
        )
        dataset = dataset.with_split(split)
    save_dataset(dataset, directory)
    stats = dataset_statistics(dataset)
    click.echo(
        f"Wrote {stats['nodes']} nodes, {stats['edges']} edges, "
        f"{stats['classes']} classes to {directory}"
    )
