"""
trainer.py

Training loops: the GCN teacher, AdaGMLP distillation (Random
Classification partitions, Node Alignment masks, the boosting cascade),
the GLNN and Bagging baselines, and evaluation of trained models
"""
import copy
import logging
import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.metrics import accuracy_score
from sklearn.utils import resample
from tqdm import trange

from graphdistill.adaboost import (
    adakd_loss,
    ensemble_predict,
    kd_samme_cascade,
    normalize_alphas,
    uniform_weights,
)
from graphdistill.checkpoint import StudentEnsembleCheckpoint, TeacherCheckpoint
from graphdistill.config import DistillConfig, TeacherConfig
from graphdistill.constants_distill import (
    COMBINER_ADABOOST,
    COMBINER_AVERAGE,
    DEFAULT_TEACHER_HIDDEN,
    METHOD_ADAGMLP,
    METHOD_BAGGING,
    METHOD_GLNN,
)
from graphdistill.datasets import Dataset
from graphdistill.errors import ConfigError, NumericalError, TrainingError
from graphdistill.graph import normalize_adjacency
from graphdistill.log_utils import get_logger
from graphdistill.models import (
    GCNTeacher,
    MLPStudent,
    StudentEnsemble,
    copy_parameters,
    ensemble_logits,
    gcn_forward,
    gather_rows_trace,
    mlp_forward,
    restore_parameters,
)
from graphdistill.numerics import (
    ComputeTape,
    Tensor,
    add,
    backward,
    gather_rows,
    make_rng,
    scale,
)
from graphdistill.objectives import (
    LossValue,
    adagmlp_loss,
    ce_loss,
    g2m_loss,
    na_hidden_loss,
    na_loss,
    na_output_loss,
    rc_loss,
)
from graphdistill.optim import AdamState, EarlyStopping, adam_step

logger = get_logger(__file__)

# Loss terms are nonnegative up to this roundoff
NONNEGATIVE_TOLERANCE = 1e-12
# "dropout" stream key of the teacher; students use their own keys
TEACHER_DROPOUT_KEY = 2 ** 16


@dataclass(frozen=True, eq=False)
class TrainingView:
    """What one training run sees

    The training side (adjacency, features, labels, train/val indices) is
    the whole graph in transductive runs and the observed induced subgraph
    in inductive runs. The evaluation side holds the features the test
    nodes are predicted from; ``eval_adjacency`` is only ever handed to the
    teacher.
    """

    adjacency: object
    features: Tensor
    labels: np.ndarray
    train_idx: np.ndarray
    val_idx: np.ndarray
    eval_features: Tensor
    eval_labels: np.ndarray
    test_idx: np.ndarray
    eval_adjacency: object
    n_classes: int
    inductive: bool = False

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def feature_dim(self):
        return self.features.shape[1]


def make_view(dataset):
    """Training and evaluation sides of a dataset with a split attached"""
    split = dataset.split
    if split is None:
        raise ConfigError(f"Dataset {dataset.name!r} has no split")
    if split.train.size == 0 or split.val.size == 0:
        raise ConfigError("Training needs nonempty train and val splits")
    full_adjacency = normalize_adjacency(dataset.graph)
    if not split.inductive:
        return TrainingView(
            adjacency=full_adjacency,
            features=dataset.features,
            labels=dataset.labels,
            train_idx=split.train,
            val_idx=split.val,
            eval_features=dataset.features,
            eval_labels=dataset.labels,
            test_idx=split.test,
            eval_adjacency=full_adjacency,
            n_classes=dataset.n_classes,
        )
    observed = dataset.subset(split.observed)
    return TrainingView(
        adjacency=normalize_adjacency(observed.graph),
        features=observed.features,
        labels=observed.labels,
        train_idx=observed.split.train,
        val_idx=observed.split.val,
        eval_features=dataset.features,
        eval_labels=dataset.labels,
        test_idx=split.test,
        eval_adjacency=full_adjacency,
        n_classes=dataset.n_classes,
        inductive=True,
    )


def as_view(data):
    return make_view(data) if isinstance(data, Dataset) else data


@dataclass
class TrainReport:
    method: str
    config: dict
    epochs: int = 0
    best_epoch: int = None
    history: list = field(default_factory=list)
    val_acc: float = 0.0
    test_acc: float = 0.0
    train_ms: float = 0.0
    infer_ms: float = 0.0
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "method": self.method,
            "config": self.config,
            "epochs": self.epochs,
            "best_epoch": self.best_epoch,
            "val_acc": self.val_acc,
            "test_acc": self.test_acc,
            "train_ms": self.train_ms,
            "infer_ms": self.infer_ms,
            "metadata": self.metadata,
            "history": self.history,
        }

    @property
    def losses(self):
        return [entry["loss"] for entry in self.history]


def accuracy(labels, predictions):
    if len(labels) == 0:
        return 0.0
    return float(accuracy_score(labels, predictions))


def _progress(n_epochs, desc):
    return trange(
        n_epochs, desc=desc, leave=False, disable=not logger.isEnabledFor(logging.DEBUG)
    )


def _check_nonnegative(breakdown, epoch):
    for name, value in breakdown.items():
        if value < -NONNEGATIVE_TOLERANCE:
            raise TrainingError(f"loss term {name} is negative ({value})", epoch)


def rc_partition(labeled, k, seed, *keys):
    """Random disjoint cover of the labelled nodes by K subsets

    Subsets 1..K-1 hold floor(|V^L|/K) nodes each, subset K the rest. Each
    subset is returned sorted.
    """
    labeled = np.asarray(labeled, dtype=np.int64)
    if k < 1 or labeled.size < k:
        raise ConfigError(f"cannot split {labeled.size} labelled nodes among K={k} students")
    rng = make_rng(seed, "rc", *keys)
    order = rng.permutation(labeled)
    size = labeled.size // k
    subsets = [order[i * size : (i + 1) * size] for i in range(k - 1)]
    subsets.append(order[(k - 1) * size :])
    return [np.sort(subset) for subset in subsets]


def mask_features(x_rows, rho, rng):
    """Zero exactly floor(ρ·d) uniformly chosen positions in every row"""
    if not 0 <= rho < 1:
        raise ConfigError(f"ρ out of range: ρ ∈ [0,1), got {rho}")
    values = x_rows.data if isinstance(x_rows, Tensor) else np.asarray(x_rows, dtype=np.float64)
    rows, d = values.shape
    n_masked = int(np.floor(round(rho * d, 9)))
    if n_masked == 0 or rows == 0:
        return Tensor(values)
    keys = rng.random((rows, d))
    positions = np.argpartition(keys, n_masked - 1, axis=1)[:, :n_masked]
    masked = values.copy()
    np.put_along_axis(masked, positions, 0.0, axis=1)
    return Tensor(masked)


def mask_rows(features, rows, rho, seed):
    """Copy of ``features`` with ``rows`` masked by the evaluation sampler"""
    values = features.data if isinstance(features, Tensor) else np.asarray(features)
    if rho == 0 or len(rows) == 0:
        return Tensor(values)
    masked = values.copy()
    masked[rows] = mask_features(values[rows], rho, make_rng(seed, "eval_mask")).data
    return Tensor(masked)


def train_teacher(data, config=None, seed=None):
    """Fit a GCN with cross-entropy on the train nodes

    Early-stops on validation accuracy and restores the best epoch.

    Returns
    -------
    checkpoint : TeacherCheckpoint
    report : TrainReport
    """
    config = config or TeacherConfig()
    seed = config.seed if seed is None else seed
    view = as_view(data)
    teacher = GCNTeacher.from_config(config, view.feature_dim, view.n_classes, seed)
    parameters = teacher.parameters
    state = AdamState(parameters)
    stopper = EarlyStopping(config.patience)
    best = copy_parameters(parameters)
    train_labels = view.labels[view.train_idx]
    val_labels = view.labels[view.val_idx]
    history = []

    start = time.perf_counter()
    epoch = -1
    for epoch in _progress(config.max_epochs, "teacher"):
        try:
            tape = ComputeTape()
            rng = make_rng(seed, "dropout", epoch, TEACHER_DROPOUT_KEY)
            logits = gcn_forward(view.adjacency, view.features, teacher, True, rng, tape)
            loss = ce_loss(gather_rows(logits, view.train_idx), train_labels)
            grads = backward(tape, loss.node, parameters)
            adam_step(parameters, grads, state, config.lr, config.weight_decay)
            logits = gcn_forward(view.adjacency, view.features, teacher, False)
        except NumericalError as error:
            raise TrainingError(str(error), epoch) from error
        val_acc = accuracy(val_labels, np.argmax(logits.data[view.val_idx], axis=1))
        history.append({"epoch": epoch, "loss": loss.value, "val_acc": val_acc})
        if epoch % config.log_every == 0:
            logger.info(f"teacher epoch {epoch}: ce={loss.value:.4f} val_acc={val_acc:.4f}")
        if stopper(val_acc, epoch):
            best = copy_parameters(parameters)
        if stopper.early_stop:
            break
    restore_parameters(parameters, best)
    train_ms = (time.perf_counter() - start) * 1000

    checkpoint = TeacherCheckpoint(teacher, config.to_dict(), stopper.best_epoch)
    report = TrainReport("teacher", config.to_dict(), epochs=epoch + 1, history=history)
    report.best_epoch = stopper.best_epoch
    report.train_ms = train_ms
    metrics = evaluate_teacher(view, teacher)
    report.val_acc, report.test_acc, report.infer_ms = (
        metrics["val_acc"],
        metrics["test_acc"],
        metrics["infer_ms"],
    )
    logger.info(
        f"teacher finished after {report.epochs} epochs (best {report.best_epoch}): "
        f"val_acc={report.val_acc:.4f} test_acc={report.test_acc:.4f}"
    )
    return checkpoint, report


def teacher_logits(view, teacher):
    """Frozen teacher logits on the training side, dropout off"""
    if isinstance(teacher, TeacherCheckpoint):
        teacher = teacher.teacher
    return gcn_forward(view.adjacency, view.features, teacher, False).data


def _student_keys(cfg, k):
    """(seed, key) of every student; explicit student seeds share key 0"""
    if cfg.student_seeds is not None:
        return [(seed, 0) for seed in cfg.student_seeds[:k]]
    return [(cfg.seed, index) for index in range(k)]


def _build_students(cfg, view, teacher, k):
    teacher_hidden = teacher.widths[1] if teacher.layers > 1 else DEFAULT_TEACHER_HIDDEN
    layers, hidden = cfg.student_architecture(teacher.layers, teacher_hidden)
    widths = [view.feature_dim] + [hidden] * (layers - 1) + [view.n_classes]
    return [
        MLPStudent(widths, cfg.dropout, seed=seed, key=index, init_key=key)
        for index, (seed, key) in enumerate(_student_keys(cfg, k))
    ]


def _check_teacher(view, teacher):
    if teacher.widths[0] != view.feature_dim or teacher.widths[-1] != view.n_classes:
        raise ConfigError(
            f"teacher maps {teacher.widths[0]} features to {teacher.widths[-1]} classes, "
            f"dataset has {view.feature_dim} features and {view.n_classes} classes"
        )


class _DistillRun:
    """Shared epoch loop of every student objective

    Subclasses build the per-epoch loss with ``objective`` and say which
    combiner serves validation predictions.
    """

    method = None
    combiner = COMBINER_ADABOOST

    def __init__(self, view, teacher, cfg, k):
        if isinstance(teacher, TeacherCheckpoint):
            teacher = teacher.teacher
        _check_teacher(view, teacher)
        self.view = view
        self.cfg = cfg
        self.k = k
        self.keys = _student_keys(cfg, k)
        self.teacher_logits = teacher_logits(view, teacher)
        self.students = _build_students(cfg, view, teacher, k)
        self.parameters = [p for s in self.students for p in s.parameters]
        self.train_labels = view.labels[view.train_idx]
        self.val_features = view.features.data[view.val_idx]
        self.val_labels = view.labels[view.val_idx]
        self.alphas = np.ones(k)

    def objective(self, tape, epoch):
        raise NotImplementedError

    def refresh_alphas(self):
        """Combining weights of the current parameters; fixed unless boosting"""

    def forward_all(self, tape, epoch):
        traces = []
        for student, (seed, key) in zip(self.students, self.keys):
            rng = make_rng(seed, "dropout", epoch, key)
            traces.append(mlp_forward(self.view.features, student, True, rng, tape))
        return traces

    def validation_accuracy(self):
        ensemble = StudentEnsemble(self.students, self.alphas, self.combiner)
        logits = ensemble_logits(ensemble, self.val_features)
        predictions = ensemble_predict(logits, normalize_alphas(self.alphas), self.combiner)
        return accuracy(self.val_labels, predictions)

    def run(self):
        cfg = self.cfg
        state = AdamState(self.parameters)
        stopper = EarlyStopping(cfg.patience)
        best = copy_parameters(self.parameters)
        best_alphas = self.alphas.copy()
        history = []

        start = time.perf_counter()
        epoch = -1
        for epoch in _progress(cfg.max_epochs, self.method):
            try:
                tape = ComputeTape()
                loss = self.objective(tape, epoch)
                _check_nonnegative(loss.breakdown, epoch)
                grads = backward(tape, loss.node, self.parameters)
                adam_step(self.parameters, grads, state, cfg.lr, cfg.weight_decay)
                self.refresh_alphas()
            except NumericalError as error:
                raise TrainingError(str(error), epoch) from error
            val_acc = self.validation_accuracy()
            entry = {"epoch": epoch, "loss": loss.value, "val_acc": val_acc}
            entry.update(loss.breakdown)
            entry["alphas"] = self.alphas.tolist()
            history.append(entry)
            if epoch % cfg.log_every == 0:
                logger.info(
                    f"{self.method} epoch {epoch}: loss={loss.value:.4f} val_acc={val_acc:.4f}"
                )
            if stopper(val_acc, epoch):
                best = copy_parameters(self.parameters)
                best_alphas = self.alphas.copy()
            if stopper.early_stop:
                break
        restore_parameters(self.parameters, best)
        train_ms = (time.perf_counter() - start) * 1000

        ensemble = StudentEnsemble(self.students, best_alphas, self.combiner)
        checkpoint = StudentEnsembleCheckpoint(
            ensemble, cfg.to_dict(), self.method, stopper.best_epoch
        )
        report = TrainReport(self.method, cfg.to_dict(), epochs=epoch + 1, history=history)
        report.best_epoch = stopper.best_epoch
        report.train_ms = train_ms
        metrics = evaluate_ensemble(self.view, ensemble)
        report.val_acc, report.test_acc, report.infer_ms = (
            metrics["val_acc"],
            metrics["test_acc"],
            metrics["infer_ms"],
        )
        report.metadata["alphas"] = best_alphas.tolist()
        logger.info(
            f"{self.method} finished after {report.epochs} epochs "
            f"(best {report.best_epoch}): val_acc={report.val_acc:.4f} "
            f"test_acc={report.test_acc:.4f}"
        )
        return checkpoint, report


class _AdaGMLPRun(_DistillRun):
    method = METHOD_ADAGMLP

    def __init__(self, view, teacher, cfg):
        super().__init__(view, teacher, cfg, cfg.k)
        self.node_weights = uniform_weights(view.n)
        self.start_weights = self.node_weights
        self.partition = self.draw_partition()

    def draw_partition(self, *keys):
        if not self.cfg.rc_enabled:
            # Pooled CE: every student sees all of V^L
            return [self.view.train_idx] * self.k
        return rc_partition(self.view.train_idx, self.k, self.cfg.seed, *keys)

    def node_alignment(self, tape, epoch, traces):
        cfg = self.cfg
        clean_logits, clean_hidden, masked_logits, masked_hidden = [], [], [], []
        for index, (student, trace, subset, (seed, key)) in enumerate(
            zip(self.students, traces, self.partition, self.keys)
        ):
            rows = self.view.features.data[subset]
            masked = mask_features(rows, cfg.rho, make_rng(seed, "mask", epoch, key, index))
            rng = make_rng(seed, "na_dropout", epoch, key, index)
            if cfg.share_na_dropout:
                clean = mlp_forward(rows, student, True, copy.deepcopy(rng), tape)
            else:
                clean = gather_rows_trace(trace, subset)
            masked_trace = mlp_forward(masked, student, True, rng, tape)
            clean_logits.append(clean.logits)
            clean_hidden.append(clean)
            masked_logits.append(masked_trace.logits)
            masked_hidden.append(masked_trace)
        na_o = na_output_loss(clean_logits, masked_logits) if cfg.na_o_enabled else None
        na_h = (
            na_hidden_loss(clean_hidden, masked_hidden, self.students[0].layers)
            if cfg.na_h_enabled
            else None
        )
        return na_loss(na_o, na_h, cfg.lambda_na, cfg.sweep_mode)

    def objective(self, tape, epoch):
        cfg = self.cfg
        if cfg.resample_rc_each_epoch:
            self.partition = self.draw_partition(epoch + 1)
        traces = self.forward_all(tape, epoch)
        logits = [trace.logits for trace in traces]

        rc = rc_loss(
            [gather_rows(z, subset) for z, subset in zip(logits, self.partition)],
            [self.view.labels[subset] for subset in self.partition],
        )
        self.start_weights = (
            self.node_weights if cfg.carry_node_weights else uniform_weights(self.view.n)
        )
        cascade = kd_samme_cascade(
            self.teacher_logits,
            logits,
            self.start_weights,
            cfg.beta,
            cfg.eps_error,
            cfg.eps_alpha,
            boosting=cfg.adakd_enabled,
        )
        self.node_weights = cascade.weights
        self.alphas = np.array([stats.alpha for stats in cascade.stats])
        adakd = adakd_loss(self.teacher_logits, logits, cfg.tau, cascade.schedule)
        na = self.node_alignment(tape, epoch, traces) if cfg.na_enabled else None
        return adagmlp_loss(rc, adakd, na, cfg.lambda_, cfg.sweep_mode)

    def refresh_alphas(self):
        """Rerun the cascade on an inference forward of the stepped students"""
        cfg = self.cfg
        logits = [mlp_forward(self.view.features, s, False).logits.data for s in self.students]
        cascade = kd_samme_cascade(
            self.teacher_logits,
            logits,
            self.start_weights,
            cfg.beta,
            cfg.eps_error,
            cfg.eps_alpha,
            boosting=cfg.adakd_enabled,
        )
        self.alphas = np.array([stats.alpha for stats in cascade.stats])


class _GLNNRun(_DistillRun):
    method = METHOD_GLNN

    def __init__(self, view, teacher, cfg):
        super().__init__(view, teacher, cfg, 1)

    def objective(self, tape, epoch):
        (trace,) = self.forward_all(tape, epoch)
        return g2m_loss(
            trace.logits,
            self.view.train_idx,
            self.train_labels,
            self.teacher_logits,
            self.cfg.tau,
            self.cfg.lambda_,
            self.cfg.sweep_mode,
        )


class _BaggingRun(_DistillRun):
    method = METHOD_BAGGING
    combiner = COMBINER_AVERAGE

    def __init__(self, view, teacher, cfg):
        if cfg.k < 2:
            raise ConfigError(f"bagging needs K >= 2, got {cfg.k}")
        super().__init__(view, teacher, cfg, cfg.k)
        self.samples = [
            bootstrap_sample(view.train_idx, make_rng(seed, "bootstrap", key))
            for seed, key in self.keys
        ]

    def objective(self, tape, epoch):
        traces = self.forward_all(tape, epoch)
        losses = [
            g2m_loss(
                trace.logits,
                sample,
                self.view.labels[sample],
                self.teacher_logits,
                self.cfg.tau,
                self.cfg.lambda_,
                self.cfg.sweep_mode,
            )
            for trace, sample in zip(traces, self.samples)
        ]
        return mean_loss(losses, "bagging")


def bootstrap_sample(labeled, rng):
    """|V^L| draws with replacement from the labelled nodes"""
    return np.asarray(
        resample(
            np.asarray(labeled),
            replace=True,
            n_samples=len(labeled),
            random_state=int(rng.integers(2 ** 31)),
        )
    )


def mean_loss(losses, name):
    total = losses[0].node
    for loss in losses[1:]:
        total = add(total, loss.node)
    node = scale(total, 1.0 / len(losses))
    breakdown = {name: node.value}
    for index, loss in enumerate(losses):
        breakdown.update({f"{key}_{index}": value for key, value in loss.breakdown.items()})
    return LossValue(node, breakdown)


def distill_adagmlp(data, teacher, cfg=None):
    """Train K students jointly under RC + boosted KD + NA

    Returns
    -------
    checkpoint : StudentEnsembleCheckpoint
        Best-epoch parameters and that epoch's combining weights
    report : TrainReport
    """
    return _AdaGMLPRun(as_view(data), teacher, cfg or DistillConfig()).run()


def distill_glnn(data, teacher, cfg=None):
    """Single student trained with the G2M objective (λ·CE + (1-λ)·KL)"""
    return _GLNNRun(as_view(data), teacher, cfg or DistillConfig()).run()


def distill_bagging(data, teacher, cfg=None):
    """K students, each on its own bootstrap sample of V^L, averaged at inference"""
    return _BaggingRun(as_view(data), teacher, cfg or DistillConfig()).run()


DISTILLERS = {
    METHOD_ADAGMLP: distill_adagmlp,
    METHOD_GLNN: distill_glnn,
    METHOD_BAGGING: distill_bagging,
}


def distill(data, teacher, cfg, method=METHOD_ADAGMLP):
    try:
        distiller = DISTILLERS[method]
    except KeyError:
        raise ConfigError(f"Unknown distillation method {method!r}")
    return distiller(data, teacher, cfg)


def evaluate_teacher(view, teacher, missing_rate=0.0, seed=0):
    """Validation and test accuracy of a teacher, test features optionally masked"""
    if isinstance(teacher, TeacherCheckpoint):
        teacher = teacher.teacher
    view = as_view(view)
    val_logits = gcn_forward(view.adjacency, view.features, teacher, False)
    val_acc = accuracy(
        view.labels[view.val_idx], np.argmax(val_logits.data[view.val_idx], axis=1)
    )
    features = mask_rows(view.eval_features, view.test_idx, missing_rate, seed)
    start = time.perf_counter()
    logits = gcn_forward(view.eval_adjacency, features, teacher, False)
    predictions = np.argmax(logits.data[view.test_idx], axis=1)
    infer_ms = (time.perf_counter() - start) * 1000
    return {
        "val_acc": val_acc,
        "test_acc": accuracy(view.eval_labels[view.test_idx], predictions),
        "infer_ms": infer_ms,
    }


def evaluate_ensemble(view, ensemble, combiner=None, missing_rate=0.0, seed=0, n_jobs=1):
    """Validation and test accuracy of an ensemble from features alone"""
    if isinstance(ensemble, StudentEnsembleCheckpoint):
        ensemble = ensemble.ensemble
    view = as_view(view)
    combiner = combiner or ensemble.combiner
    alpha_bar = ensemble.alpha_bar
    val_logits = ensemble_logits(ensemble, view.features.data[view.val_idx], n_jobs)
    val_acc = accuracy(
        view.labels[view.val_idx], ensemble_predict(val_logits, alpha_bar, combiner)
    )
    features = mask_rows(view.eval_features, view.test_idx, missing_rate, seed)
    test_features = features.data[view.test_idx]
    start = time.perf_counter()
    logits = ensemble_logits(ensemble, test_features, n_jobs)
    predictions = ensemble_predict(logits, alpha_bar, combiner)
    infer_ms = (time.perf_counter() - start) * 1000
    return {
        "val_acc": val_acc,
        "test_acc": accuracy(view.eval_labels[view.test_idx], predictions),
        "infer_ms": infer_ms,
    }
