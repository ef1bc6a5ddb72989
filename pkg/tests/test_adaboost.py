"""
test_adaboost.py

Tests for the KD-SAMME boosting cascade and ensemble inference
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal


@pytest.fixture
def teacher_logits():
    return np.array([[2.0, 0.0, -1.0], [0.0, 1.0, 0.0], [0.5, 0.5, 3.0], [1.0, 1.0, 1.0]])


@pytest.fixture
def student_logits():
    return [
        np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]),
        np.array([[0.0, 1.0, 0.0], [0.0, 0.5, 0.0], [1.0, 0.0, 2.0], [0.0, 0.0, 0.0]]),
    ]


def test_divergence():
    from graphdistill.adaboost import divergence

    logits = np.array([[1.0, 2.0], [0.0, -3.0]])
    assert_array_equal(divergence(logits, logits), [0.0, 0.0])
    test = divergence([[0.0, 0.0]], [[0.0, np.log(3)]])
    assert_allclose(test, [0.143841], atol=1e-6)


def test_divergence_shape_mismatch():
    from graphdistill.adaboost import divergence
    from graphdistill.errors import DimensionError

    with pytest.raises(DimensionError):
        divergence(np.zeros((2, 3)), np.zeros((3, 3)))


def test_weighted_error():
    from graphdistill.adaboost import weighted_error

    assert weighted_error([0.5, 0.5], [0.0, np.log(2)], beta=1.0) == pytest.approx(0.25)


def test_weighted_error_clamps():
    from graphdistill.adaboost import weighted_error
    from graphdistill.constants_distill import EPS_ERROR

    perfect = [0.0, 0.0, 0.0]
    assert weighted_error([1 / 3] * 3, perfect, beta=3.0, clamp=False) == 0.0
    assert weighted_error([1 / 3] * 3, perfect, beta=3.0) == EPS_ERROR
    saturated = weighted_error([1.0], [0.5], beta=1e6)
    assert saturated == pytest.approx(1 - EPS_ERROR)


def test_weighted_error_beta():
    from graphdistill.adaboost import weighted_error
    from graphdistill.errors import ConfigError

    with pytest.raises(ConfigError):
        weighted_error([1.0], [0.1], beta=0.0)


@pytest.mark.parametrize(
    "e, expected",
    [(0.25, 1.098612), (1e-3, 6.906755)],
)
def test_combining_weight(e, expected):
    from graphdistill.adaboost import combining_weight

    assert combining_weight(e) == pytest.approx(expected, abs=1e-6)


def test_combining_weight_floor():
    from graphdistill.adaboost import combining_weight
    from graphdistill.constants_distill import EPS_ALPHA

    assert combining_weight(0.5) == EPS_ALPHA
    assert combining_weight(0.9) == EPS_ALPHA


def test_update_weights():
    from graphdistill.adaboost import update_weights

    test = update_weights([0.5, 0.5], np.log(3), [0.0, np.log(2)], beta=1.0)
    assert_allclose(test, [0.36603, 0.63397], atol=1e-5)


def test_update_weights_fixed_points():
    from graphdistill.adaboost import update_weights

    w = np.array([0.2, 0.3, 0.5])
    assert_allclose(update_weights(w, 2.0, np.zeros(3), beta=3.0), w)
    nearly = update_weights(w, 1e-8, np.array([0.1, 2.0, 0.0]), beta=3.0)
    assert_allclose(nearly, w, atol=1e-7)


def test_normalize_alphas():
    from graphdistill.adaboost import normalize_alphas
    from graphdistill.errors import ContractError

    assert_allclose(normalize_alphas([1.0, 3.0]), [0.25, 0.75])
    with pytest.raises(ContractError):
        normalize_alphas([1.0, 0.0])


def test_cascade_schedule(teacher_logits, student_logits):
    from graphdistill.adaboost import (
        combining_weight,
        divergence,
        kd_samme_cascade,
        uniform_weights,
        update_weights,
        weighted_error,
    )

    w = uniform_weights(4)
    result = kd_samme_cascade(teacher_logits, student_logits, w, beta=3.0)
    assert len(result.schedule) == 2
    assert_array_equal(result.schedule[0], w)

    d = divergence(teacher_logits, student_logits[0])
    e = weighted_error(w, d, 3.0)
    alpha = combining_weight(e)
    assert result.stats[0].error == pytest.approx(e)
    assert result.stats[0].alpha == pytest.approx(alpha)
    assert_allclose(result.schedule[1], update_weights(w, alpha, d, 3.0))
    assert result.weights.sum() == pytest.approx(1.0)
    # Poorly distilled nodes gain weight
    assert np.argmax(result.schedule[1]) == np.argmax(d)


def test_cascade_without_boosting(teacher_logits, student_logits):
    from graphdistill.adaboost import kd_samme_cascade, uniform_weights

    w = uniform_weights(4)
    result = kd_samme_cascade(teacher_logits, student_logits, w, 3.0, boosting=False)
    for weights in result.schedule:
        assert_array_equal(weights, w)
    assert [s.alpha for s in result.stats] == [1.0, 1.0]


def test_cascade_needs_students(teacher_logits):
    from graphdistill.adaboost import kd_samme_cascade, uniform_weights
    from graphdistill.errors import ContractError

    with pytest.raises(ContractError):
        kd_samme_cascade(teacher_logits, [], uniform_weights(4), 3.0)


def test_adakd_loss(teacher_logits, student_logits):
    from graphdistill.adaboost import adakd_loss, kd_samme_cascade, uniform_weights
    from graphdistill.objectives import kl_loss

    schedule = kd_samme_cascade(
        teacher_logits, student_logits, uniform_weights(4), 3.0
    ).schedule
    test = adakd_loss(teacher_logits, student_logits, 0.5, schedule)
    stages = [
        kl_loss(teacher_logits, z, 0.5, w).value for z, w in zip(student_logits, schedule)
    ]
    assert test.value == pytest.approx(np.mean(stages))
    assert test.breakdown["kd_1"] == pytest.approx(stages[1])


def test_adakd_loss_reductions(teacher_logits):
    from graphdistill.adaboost import adakd_loss, uniform_weights
    from graphdistill.objectives import kl_loss

    w = uniform_weights(4)
    student = teacher_logits[::-1].copy()
    single = adakd_loss(teacher_logits, [student], 1.0, [w])
    assert single.value == pytest.approx(kl_loss(teacher_logits, student).value)
    same = adakd_loss(teacher_logits, [teacher_logits, teacher_logits], 1.0, [w, w])
    assert same.value == pytest.approx(0.0, abs=1e-12)


def test_ensemble_predict_weighted():
    from graphdistill.adaboost import ensemble_predict

    first = np.log([[0.6, 0.4]])
    second = np.log([[0.3, 0.7]])
    assert_array_equal(ensemble_predict([first, second], [0.5, 0.5], "adaboost"), [1])
    assert_array_equal(ensemble_predict([first, second], [0.9, 0.1], "adaboost"), [0])
    assert_array_equal(ensemble_predict([first, second], mode="average"), [1])


def test_ensemble_predict_single_student():
    from graphdistill.adaboost import ensemble_predict

    logits = np.array([[0.1, 2.0, 0.3], [3.0, 0.0, 0.0]])
    for mode in ("adaboost", "average", "vote"):
        assert_array_equal(ensemble_predict([logits], [1.0], mode), [1, 0])


def test_ensemble_predict_vote_ties():
    from graphdistill.adaboost import ensemble_predict

    first = np.array([[0.0, 1.0, 0.0]])
    second = np.array([[0.0, 0.0, 1.0]])
    third = np.array([[0.0, 0.0, 2.0]])
    assert_array_equal(ensemble_predict([first, second], mode="vote"), [1])
    assert_array_equal(ensemble_predict([first, second, third], mode="vote"), [2])


def test_ensemble_predict_alpha_scaling(student_logits):
    from graphdistill.adaboost import ensemble_predict, normalize_alphas

    alphas = np.array([0.3, 1.7])
    base = ensemble_predict(student_logits, normalize_alphas(alphas))
    scaled = ensemble_predict(student_logits, normalize_alphas(alphas * 42))
    assert_array_equal(base, scaled)


def test_ensemble_predict_errors():
    from graphdistill.adaboost import ensemble_predict
    from graphdistill.errors import ConfigError, ContractError

    with pytest.raises(ContractError):
        ensemble_predict([], [], "adaboost")
    with pytest.raises(ConfigError):
        ensemble_predict([np.zeros((1, 2))], [1.0], "median")


def test_node_weights_stay_on_simplex():
    from graphdistill.adaboost import (
        combining_weight,
        uniform_weights,
        update_weights,
        weighted_error,
    )
    from graphdistill.constants_distill import EPS_ALPHA
    from graphdistill.numerics import make_rng

    rng = make_rng(3, "gradcheck")
    w = uniform_weights(50)
    for _ in range(200):
        d = rng.exponential(size=50)
        alpha = combining_weight(weighted_error(w, d, beta=3.0))
        assert alpha >= EPS_ALPHA
        w = update_weights(w, alpha, d, beta=3.0)
        assert abs(w.sum() - 1) <= 1e-9
        assert np.all(w >= 0)
