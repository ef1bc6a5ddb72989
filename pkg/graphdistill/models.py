"""
models.py

The GCN teacher, the MLP students and the student ensemble that serves
predictions from features alone
"""
from collections import namedtuple

import numpy as np
from joblib import Parallel, delayed

from graphdistill.constants_distill import ACTIVATION, INIT_SCHEME
from graphdistill.errors import ConfigError, ContractError, DimensionError
from graphdistill.graph import spmm
from graphdistill.log_utils import get_logger
from graphdistill.numerics import (
    Parameter,
    add_bias,
    as_tensor,
    dropout,
    gather_rows,
    make_rng,
    matmul,
    relu,
)
from graphdistill.os_utils import get_max_threads

logger = get_logger(__file__)

# Role keys of the "init" random stream
TEACHER_ROLE = 0
STUDENT_ROLE = 1

ForwardTrace = namedtuple("ForwardTrace", ["hidden", "logits"])


def init_params(widths, seed, prefix, bias=True, scheme=INIT_SCHEME, keys=()):
    """Glorot-uniform weights and zero biases for consecutive widths

    Parameters
    ----------
    widths : list of int
        Input width, hidden widths, output width
    seed : int
    prefix : str
        Parameter ids are ``{prefix}.W{l}`` and ``{prefix}.b{l}``
    bias : bool
    scheme : str
        Only "glorot_uniform" is implemented
    keys : tuple of int
        Extra keys for the "init" random stream

    Returns
    -------
    weights : list of Parameter
    biases : list of Parameter, empty when ``bias`` is False
    """
    if scheme != INIT_SCHEME:
        raise ConfigError(f"Unknown initialization scheme {scheme!r}")
    if len(widths) < 2 or any(int(w) < 1 for w in widths):
        raise ConfigError(f"Widths must be positive, got {widths}")
    rng = make_rng(seed, "init", *keys)
    weights, biases = [], []
    for layer, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:]), start=1):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(
            Parameter(
                f"{prefix}.W{layer}", rng.uniform(-bound, bound, size=(fan_in, fan_out))
            )
        )
        if bias:
            biases.append(Parameter(f"{prefix}.b{layer}", np.zeros(fan_out)))
    return weights, biases


def _bind(parameter, tape):
    return tape.watch(parameter) if tape is not None else parameter.tensor


class GCNTeacher:
    """Graph convolution layers without biases

    ``widths`` runs from the feature dimension to the class count.
    """

    kind = "gcn"

    def __init__(self, widths, dropout=0.5, seed=0, weights=None):
        self.widths = [int(w) for w in widths]
        self.dropout = float(dropout)
        if weights is None:
            weights, _ = init_params(
                self.widths, seed, "teacher", bias=False, keys=(TEACHER_ROLE,)
            )
        self.weights = weights

    @classmethod
    def from_config(cls, config, n_features, n_classes, seed):
        widths = [n_features] + [config.hidden] * (config.layers - 1) + [n_classes]
        return cls(widths, config.dropout, seed)

    @property
    def layers(self):
        return len(self.widths) - 1

    @property
    def parameters(self):
        return list(self.weights)

    @property
    def architecture(self):
        return {
            "kind": self.kind,
            "widths": self.widths,
            "dropout": self.dropout,
            "activation": ACTIVATION,
            "bias": False,
        }


class MLPStudent:
    """Fully connected layers with biases; the hidden widths are all equal"""

    kind = "mlp"

    def __init__(
        self, widths, dropout=0.5, seed=0, key=0, init_key=None, weights=None, biases=None
    ):
        self.widths = [int(w) for w in widths]
        if len(self.widths) < 3:
            raise ConfigError(f"An MLP student needs L >= 2 layers, got widths {widths}")
        self.dropout = float(dropout)
        self.key = key
        if weights is None:
            # Students sharing an init_key and seed start from the same weights
            init_key = key if init_key is None else init_key
            weights, biases = init_params(
                self.widths, seed, f"student{key}", keys=(STUDENT_ROLE, init_key)
            )
        self.weights = weights
        self.biases = biases

    @property
    def layers(self):
        return len(self.widths) - 1

    @property
    def parameters(self):
        return [p for pair in zip(self.weights, self.biases) for p in pair]

    @property
    def architecture(self):
        return {
            "kind": self.kind,
            "widths": self.widths,
            "dropout": self.dropout,
            "activation": ACTIVATION,
            "bias": True,
        }


def gcn_forward(adj, x, teacher, training, rng=None, tape=None):
    """Logits Z = Â H^(L-1) W^(L) with H^(l) = ReLU(Â H^(l-1) W^(l))

    Dropout is applied to the input of every layer in training mode.
    """
    h = as_tensor(x)
    if h.data.ndim != 2 or h.shape[1] != teacher.widths[0]:
        raise DimensionError(
            f"Teacher expects {teacher.widths[0]} features, got shape {h.shape}"
        )
    for layer, weight in enumerate(teacher.weights, start=1):
        h = dropout(h, teacher.dropout, training, rng)
        h = spmm(adj, matmul(h, _bind(weight, tape)))
        if layer < teacher.layers:
            h = relu(h)
    return h


def mlp_forward(x_rows, student, training, rng=None, tape=None):
    """Hidden activations and logits of one student

    h^(l) = ReLU(h^(l-1) W^(l) + b^(l)) for l < L and the logits skip the
    activation. Dropout acts on each hidden activation before the next layer;
    the trace keeps the activations themselves.
    """
    h = as_tensor(x_rows)
    if h.data.ndim != 2 or h.shape[1] != student.widths[0]:
        raise DimensionError(
            f"Student expects {student.widths[0]} features, got shape {h.shape}"
        )
    hidden = []
    for layer, (weight, bias) in enumerate(zip(student.weights, student.biases), start=1):
        if layer > 1:
            h = dropout(h, student.dropout, training, rng)
        h = add_bias(matmul(h, _bind(weight, tape)), _bind(bias, tape))
        if layer < student.layers:
            h = relu(h)
            hidden.append(h)
    return ForwardTrace(hidden=hidden, logits=h)


class StudentEnsemble:
    """K students plus their combining weights α and the default combiner"""

    def __init__(self, students, alphas=None, combiner="adaboost"):
        if not students:
            raise ContractError("An ensemble needs at least one student")
        self.students = list(students)
        if alphas is None:
            alphas = np.ones(len(self.students))
        self.alphas = np.asarray(alphas, dtype=np.float64)
        if self.alphas.shape != (len(self.students),):
            raise DimensionError(
                f"{self.alphas.size} combining weights for {len(self.students)} students"
            )
        self.combiner = combiner

    @property
    def k(self):
        return len(self.students)

    @property
    def alpha_bar(self):
        return self.alphas / self.alphas.sum()

    @property
    def parameters(self):
        return [p for student in self.students for p in student.parameters]

    @property
    def feature_dim(self):
        return self.students[0].widths[0]

    @property
    def n_classes(self):
        return self.students[0].widths[-1]


def ensemble_logits(ensemble, features, n_jobs=1):
    """Inference-mode logits of every student on a bare feature matrix

    Parameters
    ----------
    ensemble : StudentEnsemble
    features : numpy.ndarray or Tensor
        Rows to predict; no graph is involved
    n_jobs : int
        Threads for per-student forwards, capped by GDB_THREADS

    Returns
    -------
    logits : list of Tensor
    """
    features = as_tensor(features)

    def forward(student):
        return mlp_forward(features, student, training=False).logits

    n_jobs = get_max_threads(n_jobs)
    if n_jobs == 1 or ensemble.k == 1:
        return [forward(student) for student in ensemble.students]
    return Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(forward)(student) for student in ensemble.students
    )


def copy_parameters(parameters):
    """Snapshot of parameter values, keyed by id"""
    return {p.id: p.data.copy() for p in parameters}


def restore_parameters(parameters, snapshot):
    for p in parameters:
        p.assign(snapshot[p.id])


def gather_rows_trace(trace, idx):
    """Rows ``idx`` of every tensor in a trace"""
    return ForwardTrace(
        hidden=[gather_rows(h, idx) for h in trace.hidden],
        logits=gather_rows(trace.logits, idx),
    )
