"""
test_numerics.py

Tests for the tensor primitives and the gradient tape
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal


@pytest.fixture
def weight():
    from graphdistill.numerics import Parameter

    return Parameter("W", [[1.0, 2.0], [3.0, 4.0]])


def test_make_rng_is_reproducible():
    from graphdistill.numerics import make_rng

    first = make_rng(7, "dropout", 3, 1).random(5)
    second = make_rng(7, "dropout", 3, 1).random(5)
    assert_array_equal(first, second)


def test_make_rng_streams_differ():
    from graphdistill.numerics import make_rng

    dropout = make_rng(7, "dropout").random(5)
    mask = make_rng(7, "mask").random(5)
    other_key = make_rng(7, "dropout", 1).random(5)
    assert not np.allclose(dropout, mask)
    assert not np.allclose(dropout, other_key)


def test_make_rng_rejects_bad_input():
    from graphdistill.errors import ConfigError
    from graphdistill.numerics import make_rng

    with pytest.raises(ConfigError):
        make_rng(0, "not-a-stream")
    with pytest.raises(ConfigError):
        make_rng(-1, "split")


def test_tensor_is_read_only():
    from graphdistill.numerics import Tensor

    tensor = Tensor([[1.0, 2.0]])
    with pytest.raises(ValueError):
        tensor.data[0, 0] = 5.0


def test_matmul():
    from graphdistill.numerics import matmul

    test = matmul([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [[2.0], [3.0]])
    assert_allclose(test.data, [[2.0], [3.0], [5.0]])

    identity = matmul(np.eye(2), [[1.0, 2.0], [3.0, 4.0]])
    assert_allclose(identity.data, [[1.0, 2.0], [3.0, 4.0]])

    zeros = matmul(np.zeros((2, 3)), np.ones((3, 4)))
    assert_array_equal(zeros.data, np.zeros((2, 4)))


def test_matmul_shape_mismatch():
    from graphdistill.errors import DimensionError
    from graphdistill.numerics import matmul

    with pytest.raises(DimensionError):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


@pytest.mark.parametrize(
    "row, temperature, expected",
    [
        ([0.0, 0.0], 1.0, [0.5, 0.5]),
        ([np.log(2), 0.0], 1.0, [2 / 3, 1 / 3]),
        ([np.log(2), 0.0], 0.5, [0.8, 0.2]),
    ],
)
def test_row_softmax(row, temperature, expected):
    from graphdistill.numerics import row_softmax

    test = row_softmax([row], temperature)
    assert_allclose(test.data[0], expected)


def test_row_softmax_temperature():
    from graphdistill.errors import ConfigError
    from graphdistill.numerics import row_softmax

    with pytest.raises(ConfigError):
        row_softmax([[1.0, 2.0]], 0.0)


def test_relu():
    from graphdistill.numerics import relu

    assert_array_equal(relu([[-1.0, 0.0, 2.0]]).data, [[0.0, 0.0, 2.0]])
    assert_array_equal(relu([[-1.0, -3.0]]).data, [[0.0, 0.0]])


def test_relu_gradient():
    from graphdistill.numerics import ComputeTape, Parameter, backward, reduce_sum, relu

    x = Parameter("x", [[-1.0, 2.0]])
    tape = ComputeTape()
    loss = reduce_sum(relu(tape.watch(x)))
    grads = backward(tape, loss)
    assert_array_equal(grads["x"], [[0.0, 1.0]])


def test_dropout_identity_cases():
    from graphdistill.numerics import dropout, make_rng

    x = np.arange(6.0).reshape(2, 3)
    assert_array_equal(dropout(x, 0.0, True, make_rng(0, "dropout")).data, x)
    assert_array_equal(dropout(x, 0.9, False).data, x)


def test_dropout_survival_rate():
    from graphdistill.numerics import dropout, make_rng

    x = np.ones((100, 100))
    test = dropout(x, 0.5, True, make_rng(0, "dropout")).data
    surviving = np.mean(test != 0)
    assert 0.45 <= surviving <= 0.55
    # Survivors are scaled by 1 / (1 - p)
    assert_allclose(np.unique(test[test != 0]), [2.0])


def test_dropout_rejects_p_one():
    from graphdistill.errors import ConfigError
    from graphdistill.numerics import dropout, make_rng

    with pytest.raises(ConfigError):
        dropout(np.ones((2, 2)), 1.0, True, make_rng(0, "dropout"))


def test_gather_rows():
    from graphdistill.numerics import gather_rows

    x = np.array([[1.0], [2.0], [3.0]])
    assert_array_equal(gather_rows(x, [2, 0]).data, [[3.0], [1.0]])
    assert_array_equal(gather_rows(x, [0, 1, 2]).data, x)
    assert gather_rows(x, []).shape == (0, 1)
    with pytest.raises(IndexError):
        gather_rows(x, [3])


def test_gather_rows_gradient_scatters_back():
    from graphdistill.numerics import ComputeTape, Parameter, backward, gather_rows, reduce_sum

    x = Parameter("x", [[1.0], [2.0], [3.0]])
    tape = ComputeTape()
    loss = reduce_sum(gather_rows(tape.watch(x), [2, 2, 0]))
    grads = backward(tape, loss)
    assert_array_equal(grads["x"], [[1.0], [0.0], [2.0]])


def test_backward_sum(weight):
    from graphdistill.numerics import ComputeTape, backward, reduce_sum

    tape = ComputeTape()
    grads = backward(tape, reduce_sum(tape.watch(weight)))
    assert_array_equal(grads["W"], np.ones((2, 2)))


def test_backward_half_square(weight):
    from graphdistill.numerics import ComputeTape, backward, reduce_sum, scale, square

    tape = ComputeTape()
    loss = scale(reduce_sum(square(tape.watch(weight))), 0.5)
    grads = backward(tape, loss)
    assert_allclose(grads["W"], weight.data)


def test_backward_unused_parameter(weight):
    from graphdistill.numerics import ComputeTape, Parameter, backward, reduce_sum

    unused = Parameter("unused", np.ones(3))
    tape = ComputeTape()
    tape.watch(unused)
    grads = backward(tape, reduce_sum(tape.watch(weight)))
    assert_array_equal(grads["unused"], np.zeros(3))


def test_backward_requires_scalar(weight):
    from graphdistill.errors import ContractError
    from graphdistill.numerics import ComputeTape, backward

    tape = ComputeTape()
    with pytest.raises(ContractError):
        backward(tape, tape.watch(weight))


def test_mixing_tapes_is_refused(weight):
    from graphdistill.errors import ContractError
    from graphdistill.numerics import ComputeTape, Parameter, add

    other = Parameter("V", np.ones((2, 2)))
    first, second = ComputeTape(), ComputeTape()
    with pytest.raises(ContractError):
        add(first.watch(weight), second.watch(other))


def test_non_finite_values_raise():
    from graphdistill.errors import NumericalError
    from graphdistill.numerics import scale

    with pytest.raises(NumericalError):
        scale([[1e308]], 1e10)


def test_grad_check_quadratic(weight):
    from graphdistill.numerics import grad_check, matmul, reduce_sum, square

    x = np.array([[0.5, -1.0], [2.0, 0.25]])

    def loss_fn(tape):
        return reduce_sum(square(matmul(x, tape.watch(weight))))

    assert grad_check(loss_fn, [weight]) <= 1e-6


def test_grad_check_skips_relu_kinks():
    from graphdistill.numerics import Parameter, grad_check, reduce_sum, relu

    kinked = Parameter("k", [[0.0, 1.0, -1.0]])

    def loss_fn(tape):
        return reduce_sum(relu(tape.watch(kinked)))

    assert grad_check(loss_fn, [kinked]) <= 1e-6


def test_grad_check_rejects_eps():
    from graphdistill.errors import ConfigError
    from graphdistill.numerics import grad_check

    with pytest.raises(ConfigError):
        grad_check(lambda tape: None, [], eps=1e-1)


def test_grad_check_accepts_plain_scalar_tensor():
    from graphdistill.numerics import Parameter, grad_check, reduce_sum, square

    w = Parameter("w", [[1.5, -2.0]])
    assert grad_check(lambda tape: reduce_sum(square(tape.watch(w))), [w]) <= 1e-6


def _square_with_wrong_backward(x):
    from graphdistill.numerics import as_tensor, record

    x = as_tensor(x)
    x_data = x.data
    return record("bad_square", (x,), x_data * x_data, lambda grad, needs: (20.0 * x_data * grad,))


@pytest.mark.parametrize("value", [1.0, 1e-7])
def test_grad_check_catches_wrong_backward(value):
    from graphdistill.numerics import Parameter, grad_check, reduce_sum

    w = Parameter("w", [[value]])
    error = grad_check(lambda tape: reduce_sum(_square_with_wrong_backward(tape.watch(w))), [w])
    assert error > 0.5


def test_grad_check_fails_when_everything_is_a_kink():
    from graphdistill.errors import ContractError
    from graphdistill.numerics import Parameter, grad_check, reduce_sum, relu

    kinked = Parameter("k", [[0.0, 0.0]])
    with pytest.raises(ContractError, match="skipped all 2"):
        grad_check(lambda tape: reduce_sum(relu(tape.watch(kinked))), [kinked])
