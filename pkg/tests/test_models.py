"""
test_models.py

Tests for the GCN teacher, MLP students and the ensemble
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal


def identity_student(widths=(2, 2, 2), key=0):
    from graphdistill.models import MLPStudent
    from graphdistill.numerics import Parameter

    layers = range(1, len(widths))
    weights = [Parameter(f"student{key}.W{l}", np.eye(2)) for l in layers]
    biases = [Parameter(f"student{key}.b{l}", np.zeros(2)) for l in layers]
    return MLPStudent(list(widths), dropout=0.0, key=key, weights=weights, biases=biases)


def test_init_params_reproducible():
    from graphdistill.models import init_params

    first, _ = init_params([4, 8, 3], seed=5, prefix="m")
    second, _ = init_params([4, 8, 3], seed=5, prefix="m")
    for a, b in zip(first, second):
        assert_array_equal(a.data, b.data)


def test_init_params_glorot_bound():
    from graphdistill.models import init_params

    weights, biases = init_params([2, 2], seed=0, prefix="m")
    assert np.all(np.abs(weights[0].data) <= np.sqrt(6 / 4))
    assert_array_equal(biases[0].data, np.zeros(2))
    assert weights[0].id == "m.W1"


def test_init_params_rejects_scheme():
    from graphdistill.errors import ConfigError
    from graphdistill.models import init_params

    with pytest.raises(ConfigError):
        init_params([2, 2], seed=0, prefix="m", scheme="he_normal")


def test_gcn_forward_path(path_graph):
    from graphdistill.graph import normalize_adjacency
    from graphdistill.models import GCNTeacher, gcn_forward
    from graphdistill.numerics import Parameter

    teacher = GCNTeacher([2, 2], dropout=0.0, weights=[Parameter("teacher.W1", np.eye(2))])
    logits = gcn_forward(normalize_adjacency(path_graph), np.eye(2), teacher, False)
    assert_allclose(logits.data, np.full((2, 2), 0.5))


def test_gcn_forward_edgeless():
    from graphdistill.graph import Graph, normalize_adjacency
    from graphdistill.models import GCNTeacher, gcn_forward

    teacher = GCNTeacher([3, 2], dropout=0.5, seed=1)
    x = np.arange(6.0).reshape(2, 3)
    logits = gcn_forward(normalize_adjacency(Graph.from_edges(2, [])), x, teacher, False)
    assert_allclose(logits.data, x @ teacher.weights[0].data)


def test_gcn_forward_eval_is_deterministic(toy_dataset):
    from graphdistill.graph import normalize_adjacency
    from graphdistill.models import GCNTeacher, gcn_forward
    from graphdistill.numerics import make_rng

    teacher = GCNTeacher([3, 4, 2], dropout=0.5, seed=0)
    adjacency = normalize_adjacency(toy_dataset.graph)
    first = gcn_forward(adjacency, toy_dataset.features, teacher, False, make_rng(0, "dropout"))
    second = gcn_forward(adjacency, toy_dataset.features, teacher, False, make_rng(9, "dropout"))
    assert_array_equal(first.data, second.data)


def test_gcn_forward_shape_mismatch(path_graph):
    from graphdistill.errors import DimensionError
    from graphdistill.graph import normalize_adjacency
    from graphdistill.models import GCNTeacher, gcn_forward

    teacher = GCNTeacher([3, 2], seed=0)
    with pytest.raises(DimensionError):
        gcn_forward(normalize_adjacency(path_graph), np.eye(2), teacher, False)


def test_mlp_forward_identity():
    from graphdistill.models import mlp_forward

    trace = mlp_forward([[1.0, -1.0]], identity_student(), training=False)
    assert len(trace.hidden) == 1
    assert_allclose(trace.hidden[0].data, [[1.0, 0.0]])
    assert_allclose(trace.logits.data, [[1.0, 0.0]])


def test_mlp_forward_zero_weights():
    from graphdistill.models import MLPStudent, mlp_forward

    student = MLPStudent([3, 4, 2], dropout=0.0, seed=0)
    for parameter in student.parameters:
        parameter.assign(np.zeros(parameter.shape))
    trace = mlp_forward(np.ones((5, 3)), student, training=False)
    assert_array_equal(trace.hidden[0].data, np.zeros((5, 4)))
    assert_array_equal(trace.logits.data, np.zeros((5, 2)))


def test_mlp_trace_length():
    from graphdistill.models import MLPStudent, mlp_forward

    student = MLPStudent([3, 4, 4, 2], seed=0)
    trace = mlp_forward(np.ones((2, 3)), student, training=False)
    assert len(trace.hidden) == 2


def test_mlp_needs_two_layers():
    from graphdistill.errors import ConfigError
    from graphdistill.models import MLPStudent

    with pytest.raises(ConfigError):
        MLPStudent([3, 2])


def test_students_with_distinct_keys_differ():
    from graphdistill.models import MLPStudent

    first = MLPStudent([3, 4, 2], seed=0, key=0)
    second = MLPStudent([3, 4, 2], seed=0, key=1)
    same_init = MLPStudent([3, 4, 2], seed=0, key=1, init_key=0)
    assert not np.allclose(first.weights[0].data, second.weights[0].data)
    assert_array_equal(first.weights[0].data, same_init.weights[0].data)
    assert same_init.weights[0].id == "student1.W1"


def test_ensemble_alpha_bar():
    from graphdistill.errors import DimensionError
    from graphdistill.models import StudentEnsemble

    students = [identity_student(key=0), identity_student(key=1)]
    ensemble = StudentEnsemble(students, [1.0, 3.0])
    assert_allclose(ensemble.alpha_bar, [0.25, 0.75])
    assert ensemble.k == 2
    assert ensemble.feature_dim == 2
    assert ensemble.n_classes == 2
    with pytest.raises(DimensionError):
        StudentEnsemble(students, [1.0])


@pytest.mark.parametrize("n_jobs", [1, 2])
def test_ensemble_logits(n_jobs):
    from graphdistill.models import StudentEnsemble, ensemble_logits

    ensemble = StudentEnsemble([identity_student(key=0), identity_student(key=1)])
    logits = ensemble_logits(ensemble, [[1.0, -1.0], [0.5, 2.0]], n_jobs=n_jobs)
    assert len(logits) == 2
    for z in logits:
        assert_allclose(z.data, [[1.0, 0.0], [0.5, 2.0]])


def test_copy_and_restore_parameters():
    from graphdistill.models import MLPStudent, copy_parameters, restore_parameters

    student = MLPStudent([3, 4, 2], seed=0)
    snapshot = copy_parameters(student.parameters)
    original = student.weights[0].data.copy()
    student.weights[0].assign(np.zeros((3, 4)))
    restore_parameters(student.parameters, snapshot)
    assert_array_equal(student.weights[0].data, original)
