import os

import numpy as np
import pytest

"""
conftest.py contains fixtures or functions-turned-variables that can be
used in any test
"""


def pytest_addoption(parser):
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="Also run the slow end-to-end training tests",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def path_graph():
    """0 - 1"""
    from graphdistill.graph import Graph

    return Graph.from_edges(2, [(0, 1)])


@pytest.fixture
def triangle():
    from graphdistill.graph import Graph

    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def toy_dataset():
    """Six nodes in two classes joined by one bridge edge, with a split"""
    from graphdistill.datasets import Dataset, Split
    from graphdistill.graph import Graph

    graph = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)])
    features = np.array(
        [
            [1.0, 0.0, 0.1],
            [0.9, 0.1, 0.0],
            [1.0, 0.2, 0.1],
            [0.0, 1.0, 0.2],
            [0.1, 0.9, 0.0],
            [0.0, 1.0, 0.1],
        ]
    )
    labels = np.array([0, 0, 0, 1, 1, 1])
    split = Split(train=[0, 3], val=[1, 4], test=[2, 5])
    return Dataset(graph, features, labels, 2, split, name="toy")


@pytest.fixture
def preset_dataset():
    from graphdistill.datasets import make_preset

    return make_preset("test", seed=0)


@pytest.fixture
def quick_teacher_config():
    from graphdistill.config import TeacherConfig

    return TeacherConfig(hidden=16, max_epochs=30, patience=30, log_every=100)


@pytest.fixture
def quick_distill_config():
    from graphdistill.config import DistillConfig

    return DistillConfig(hidden=16, max_epochs=20, patience=20, log_every=100)


@pytest.fixture
def trained_teacher(preset_dataset, quick_teacher_config):
    """(TeacherCheckpoint, TrainReport) on the test preset"""
    from graphdistill.trainer import train_teacher

    return train_teacher(preset_dataset, quick_teacher_config)


@pytest.fixture
def dataset_dir(tmpdir, preset_dataset):
    """The test preset written to disk"""
    from graphdistill.datasets import save_dataset

    directory = os.path.join(tmpdir, "sbm")
    save_dataset(preset_dataset, directory)
    return directory
