"""
numerics.py

Dense tensors on top of numpy with a reverse-mode automatic differentiation
tape, the seeded random streams, and a finite-difference gradient checker
"""
from collections import namedtuple

import numpy as np
from scipy import special

from graphdistill.constants_distill import SEED_STREAMS
from graphdistill.errors import ConfigError, ContractError, DimensionError, NumericalError
from graphdistill.log_utils import get_logger

logger = get_logger(__file__)

DTYPES = {"float64": np.float64, "float32": np.float32}
_default_dtype = np.float64


def set_default_dtype(dtype):
    """Switch the numeric width of newly created tensors

    float64 is the default so finite-difference checks are stable; float32
    is an opt-in speed mode and is not supported by ``grad_check``
    """
    global _default_dtype
    if isinstance(dtype, str):
        try:
            dtype = DTYPES[dtype]
        except KeyError:
            raise ConfigError(
                f"Unknown dtype {dtype!r}, expected one of {sorted(DTYPES)}"
            )
    if np.dtype(dtype) not in (np.dtype(np.float64), np.dtype(np.float32)):
        raise ConfigError(f"Unsupported dtype {dtype}")
    _default_dtype = np.dtype(dtype).type


def get_default_dtype():
    return _default_dtype


def make_rng(seed, stream, *keys):
    """Independent, reproducible random stream for one purpose

    Parameters
    ----------
    seed : int
        The single user-facing seed
    stream : str
        One of the names in ``constants_distill.SEED_STREAMS``
    keys : int
        Extra integers (student index, epoch, grid index, ...) that split the
        stream further

    Returns
    -------
    rng : numpy.random.Generator
    """
    try:
        code = SEED_STREAMS[stream]
    except KeyError:
        raise ConfigError(f"Unknown random stream {stream!r}")
    if seed is None or int(seed) < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")
    sequence = np.random.SeedSequence(
        entropy=int(seed), spawn_key=(code,) + tuple(int(k) for k in keys)
    )
    return np.random.default_rng(sequence)


class Tensor:
    """Immutable dense array, optionally bound to a node of a ComputeTape"""

    __slots__ = ("data", "tape", "node")

    def __init__(self, data, tape=None, node=None):
        array = np.asarray(data, dtype=_default_dtype)
        if array is data:
            # Don't freeze the caller's array, only our view of it
            array = array.view()
        array.setflags(write=False)
        self.data = array
        self.tape = tape
        self.node = node

    @property
    def shape(self):
        return self.data.shape

    @property
    def requires_grad(self):
        return self.node is not None

    @property
    def value(self):
        """Python float of a scalar tensor"""
        if self.data.size != 1:
            raise ContractError(f"Tensor of shape {self.shape} is not a scalar")
        return float(self.data.reshape(()))

    def numpy(self):
        return self.data

    def __repr__(self):
        tracked = f", node={self.node}" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{tracked})"


class Parameter:
    """Named trainable array; the optimizer swaps ``tensor`` between steps"""

    __slots__ = ("id", "tensor", "requires_grad", "grad")

    def __init__(self, id, data, requires_grad=True):
        self.id = id
        self.tensor = Tensor(np.array(data, dtype=_default_dtype))
        self.requires_grad = requires_grad
        self.grad = None

    @property
    def data(self):
        return self.tensor.data

    @property
    def shape(self):
        return self.tensor.shape

    def assign(self, data):
        data = np.array(data, dtype=self.tensor.data.dtype)
        if data.shape != self.shape:
            raise DimensionError(
                f"Parameter {self.id} has shape {self.shape}, "
                f"cannot assign {data.shape}"
            )
        self.tensor = Tensor(data)

    def __repr__(self):
        return f"Parameter(id={self.id!r}, shape={self.shape})"


TapeEntry = namedtuple("TapeEntry", ["op", "output", "inputs", "backward"])


class ComputeTape:
    """Ordered record of primitive operations for one forward pass

    A tape is confined to the thread that builds it. Entries are appended in
    execution order, so an op's inputs always precede it and the backward
    pass is a single reverse sweep.
    """

    def __init__(self):
        self.entries = []
        self._n_nodes = 0
        self._watched = {}

    def _new_node(self):
        node = self._n_nodes
        self._n_nodes += 1
        return node

    def watch(self, parameter):
        """Bind a Parameter to this tape, once"""
        if not parameter.requires_grad:
            return parameter.tensor
        if parameter.id in self._watched:
            watched_parameter, tensor = self._watched[parameter.id]
            if watched_parameter is not parameter:
                raise ContractError(
                    f"Two different parameters share the id {parameter.id!r}"
                )
            return tensor
        tensor = Tensor(parameter.tensor.data, tape=self, node=self._new_node())
        self._watched[parameter.id] = (parameter, tensor)
        return tensor

    @property
    def parameters(self):
        return [parameter for parameter, _ in self._watched.values()]

    def record(self, op, inputs, data, backward):
        """Wrap ``data`` as the output of ``op`` and remember how to undo it

        ``backward(grad, needs)`` receives the output gradient and one flag
        per input telling whether that input needs a gradient; it returns one
        array (or None) per input.
        """
        if not np.all(np.isfinite(data)):
            raise NumericalError(f"{op} produced non-finite values")
        tapes = {id(t.tape): t.tape for t in inputs if t.requires_grad}
        if not tapes:
            return Tensor(data)
        if len(tapes) > 1 or next(iter(tapes.values())) is not self:
            raise ContractError(f"{op} mixes tensors from different tapes")
        output = Tensor(data, tape=self, node=self._new_node())
        input_nodes = tuple(t.node for t in inputs)
        self.entries.append(TapeEntry(op, output.node, input_nodes, backward))
        return output

    def __len__(self):
        return len(self.entries)


def as_tensor(x):
    if isinstance(x, Tensor):
        return x
    return Tensor(x)


def record(op, inputs, data, backward):
    """Record an op on the tape of its tracked inputs, if any"""
    tape = next((t.tape for t in inputs if t.requires_grad), None)
    if tape is None:
        if not np.all(np.isfinite(data)):
            raise NumericalError(f"{op} produced non-finite values")
        return Tensor(data)
    return tape.record(op, inputs, data, backward)


def _check_same_shape(op, a, b):
    if a.shape != b.shape:
        raise DimensionError(f"{op}: shapes {a.shape} and {b.shape} differ")


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    a_data, b_data = a.data, b.data

    def backward(grad, needs):
        grad_a = grad @ b_data.T if needs[0] else None
        grad_b = a_data.T @ grad if needs[1] else None
        return grad_a, grad_b

    return record("matmul", (a, b), a_data @ b_data, backward)


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_same_shape("add", a, b)
    return record("add", (a, b), a.data + b.data, lambda grad, needs: (grad, grad))


def subtract(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_same_shape("subtract", a, b)
    return record(
        "subtract", (a, b), a.data - b.data, lambda grad, needs: (grad, -grad)
    )


def multiply(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_same_shape("multiply", a, b)
    a_data, b_data = a.data, b.data

    def backward(grad, needs):
        return (
            grad * b_data if needs[0] else None,
            grad * a_data if needs[1] else None,
        )

    return record("multiply", (a, b), a_data * b_data, backward)


def scale(x, factor):
    x = as_tensor(x)
    factor = float(factor)
    return record(
        "scale", (x,), x.data * factor, lambda grad, needs: (grad * factor,)
    )


def multiply_constant(x, constant):
    """Elementwise product with an untracked array broadcast to ``x``"""
    x = as_tensor(x)
    constant = np.asarray(constant, dtype=x.data.dtype)
    data = x.data * constant
    if data.shape != x.shape:
        raise DimensionError(
            f"multiply_constant: {constant.shape} does not broadcast to {x.shape}"
        )
    return record(
        "multiply_constant", (x,), data, lambda grad, needs: (grad * constant,)
    )


def add_constant(x, constant):
    x = as_tensor(x)
    constant = np.asarray(constant, dtype=x.data.dtype)
    data = x.data + constant
    if data.shape != x.shape:
        raise DimensionError(
            f"add_constant: {constant.shape} does not broadcast to {x.shape}"
        )
    return record("add_constant", (x,), data, lambda grad, needs: (grad,))


def add_bias(x, bias):
    """Add a length-n bias vector to every row of an r×n matrix"""
    x, bias = as_tensor(x), as_tensor(bias)
    if x.data.ndim != 2 or bias.shape != (x.shape[1],):
        raise DimensionError(f"add_bias: bias {bias.shape} for rows {x.shape}")

    def backward(grad, needs):
        return grad, (grad.sum(axis=0) if needs[1] else None)

    return record("add_bias", (x, bias), x.data + bias.data, backward)


def square(x):
    x = as_tensor(x)
    x_data = x.data
    return record(
        "square", (x,), x_data * x_data, lambda grad, needs: (2.0 * x_data * grad,)
    )


def relu(x):
    """Elementwise max(0, x); the subgradient at 0 is 0"""
    x = as_tensor(x)
    positive = x.data > 0
    return record(
        "relu", (x,), np.where(positive, x.data, 0.0), lambda grad, needs: (grad * positive,)
    )


def dropout(x, p, training, rng=None):
    """Inverted dropout: zero with probability p, scale survivors by 1/(1-p)"""
    x = as_tensor(x)
    if not 0 <= p < 1:
        raise ConfigError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0:
        return x
    if rng is None:
        raise ContractError("dropout in training mode needs a random stream")
    keep = (rng.random(x.shape) >= p) / (1.0 - p)
    keep = keep.astype(x.data.dtype)
    return record("dropout", (x,), x.data * keep, lambda grad, needs: (grad * keep,))


def gather_rows(x, idx):
    """Copy rows ``idx`` of x in order; gradients scatter back to source rows"""
    x = as_tensor(x)
    idx = np.asarray(idx, dtype=np.intp).reshape(-1)
    n_rows = x.shape[0]
    if idx.size and (idx.min() < 0 or idx.max() >= n_rows):
        raise IndexError(f"gather_rows: index out of range for {n_rows} rows")
    shape = x.shape

    def backward(grad, needs):
        grad_x = np.zeros(shape, dtype=grad.dtype)
        np.add.at(grad_x, idx, grad)
        return (grad_x,)

    return record("gather_rows", (x,), x.data[idx], backward)


def _check_temperature(temperature):
    if not temperature > 0:
        raise ConfigError(f"temperature must be positive, got {temperature}")


def row_softmax(x, temperature=1.0):
    """Softmax of each row of x / temperature"""
    x = as_tensor(x)
    _check_temperature(temperature)
    probabilities = special.softmax(x.data / temperature, axis=1)

    def backward(grad, needs):
        inner = np.sum(grad * probabilities, axis=1, keepdims=True)
        return (probabilities * (grad - inner) / temperature,)

    return record("row_softmax", (x,), probabilities, backward)


def log_softmax(x, temperature=1.0):
    x = as_tensor(x)
    _check_temperature(temperature)
    log_probabilities = special.log_softmax(x.data / temperature, axis=1)

    def backward(grad, needs):
        probabilities = np.exp(log_probabilities)
        total = np.sum(grad, axis=1, keepdims=True)
        return ((grad - probabilities * total) / temperature,)

    return record("log_softmax", (x,), log_probabilities, backward)


def reduce_sum(x):
    """Sum of every entry, as a scalar tensor"""
    x = as_tensor(x)
    shape = x.shape
    return record(
        "reduce_sum",
        (x,),
        np.asarray(x.data.sum()),
        lambda grad, needs: (np.broadcast_to(grad, shape).copy(),),
    )


def row_sum(x):
    x = as_tensor(x)
    if x.data.ndim != 2:
        raise DimensionError(f"row_sum expects a matrix, got shape {x.shape}")
    shape = x.shape
    return record(
        "row_sum",
        (x,),
        x.data.sum(axis=1),
        lambda grad, needs: (np.broadcast_to(grad[:, None], shape).copy(),),
    )


def backward(tape, loss, parameters=None):
    """Reverse sweep over ``tape`` starting from the scalar ``loss``

    Parameters
    ----------
    tape : ComputeTape
    loss : Tensor
        Scalar produced on ``tape``
    parameters : list of Parameter, optional
        Parameters to report; defaults to every parameter watched by the tape.
        Parameters the loss never reached get zero gradients.

    Returns
    -------
    gradients : dict
        Parameter id -> gradient array with the parameter's shape
    """
    if loss.data.ndim != 0:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    if parameters is None:
        parameters = tape.parameters
    grads = {}
    if loss.requires_grad:
        if loss.tape is not tape:
            raise ContractError("loss was not produced on this tape")
        grads[loss.node] = np.ones_like(loss.data)
        for entry in reversed(tape.entries):
            grad = grads.pop(entry.output, None)
            if grad is None:
                continue
            needs = tuple(node is not None for node in entry.inputs)
            input_grads = entry.backward(grad, needs)
            for node, input_grad in zip(entry.inputs, input_grads):
                if node is None or input_grad is None:
                    continue
                if node in grads:
                    grads[node] = grads[node] + input_grad
                else:
                    grads[node] = input_grad

    gradients = {}
    for parameter in parameters:
        watched = tape._watched.get(parameter.id)
        gradient = None
        if watched is not None and watched[0] is parameter:
            gradient = grads.get(watched[1].node)
        if gradient is None:
            gradient = np.zeros(parameter.shape, dtype=parameter.data.dtype)
        parameter.grad = gradient
        gradients[parameter.id] = gradient
    return gradients


def _scalar_node(result):
    """Accept a scalar Tensor or anything with a ``node`` Tensor (LossValue)"""
    # Tensor.node is the tape index, not a Tensor
    if isinstance(result, Tensor):
        return result
    node = getattr(result, "node", None)
    if isinstance(node, Tensor):
        return node
    raise ContractError(f"loss function returned {type(result).__name__}")


def grad_check(
    loss_fn,
    params,
    eps=1e-5,
    max_coords=None,
    seed=0,
    kink_tolerance=1e-2,
    curvature_bound=100.0,
):
    """Compare analytic gradients against central finite differences

    Parameters
    ----------
    loss_fn : callable
        ``loss_fn(tape)`` builds the loss on the given tape and returns a
        scalar Tensor or LossValue. It must be deterministic (dropout off,
        masks frozen)
    params : list of Parameter
    eps : float
        Finite-difference step, in [1e-7, 1e-3]
    max_coords : int, optional
        Check at most this many randomly chosen coordinates per parameter
    seed : int
        Seed for the coordinate sample
    kink_tolerance : float
        Coordinates whose forward and backward one-sided differences disagree
        by more than this relative amount sit on a kink (relu) and are skipped
    curvature_bound : float
        On a smooth loss the one-sided differences disagree by about
        eps·|second derivative|; spreads below ``curvature_bound * eps`` are
        never treated as kinks, so near-zero gradients are still checked

    Returns
    -------
    max_relative_error : float
        Worst |analytic - fd| / max(|analytic|, |fd|, 1e-8) over checked
        coordinates

    Raises
    ------
    ContractError
        When every sampled coordinate sat on a kink
    """
    if not 1e-7 <= eps <= 1e-3:
        raise ConfigError(f"eps must be in [1e-7, 1e-3], got {eps}")
    if _default_dtype is not np.float64:
        raise ConfigError("grad_check requires the float64 numeric width")

    tape = ComputeTape()
    loss = _scalar_node(loss_fn(tape))
    gradients = backward(tape, loss, parameters=params)
    base_value = loss.value

    def evaluate():
        return _scalar_node(loss_fn(ComputeTape())).value

    rng = make_rng(seed, "gradcheck")
    worst = 0.0
    n_checked = 0
    n_skipped = 0
    smooth_spread = curvature_bound * eps
    for parameter in params:
        original = parameter.data.copy()
        analytic = gradients[parameter.id].reshape(-1)
        coordinates = np.arange(original.size)
        if max_coords is not None and original.size > max_coords:
            coordinates = np.sort(rng.choice(original.size, max_coords, replace=False))
        try:
            for coordinate in coordinates:
                shifted = original.copy().reshape(-1)
                shifted[coordinate] = original.reshape(-1)[coordinate] + eps
                parameter.assign(shifted.reshape(original.shape))
                plus = evaluate()
                shifted[coordinate] = original.reshape(-1)[coordinate] - eps
                parameter.assign(shifted.reshape(original.shape))
                minus = evaluate()

                forward_difference = (plus - base_value) / eps
                backward_difference = (base_value - minus) / eps
                spread = abs(forward_difference - backward_difference)
                scale_ = max(abs(forward_difference), abs(backward_difference), 1e-8)
                if spread > max(kink_tolerance * scale_, smooth_spread):
                    n_skipped += 1
                    continue

                finite_difference = (plus - minus) / (2 * eps)
                a = analytic[coordinate]
                denominator = max(abs(a), abs(finite_difference), 1e-8)
                worst = max(worst, abs(a - finite_difference) / denominator)
                n_checked += 1
        finally:
            parameter.assign(original)
    logger.info(f"grad_check compared {n_checked} coordinates, skipped {n_skipped} on kinks")
    if n_checked == 0 and n_skipped > 0:
        raise ContractError(f"grad_check skipped all {n_skipped} coordinates as kinks")
    return worst
