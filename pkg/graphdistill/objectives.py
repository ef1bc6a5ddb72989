"""
objectives.py

Cross-entropy, temperature-softened KL, the single-student G2M objective,
Random Classification, Node Alignment and the assembled AdaGMLP objective.
Every loss returns a LossValue whose node lives on the caller's tape.
"""
import numpy as np
from scipy import special

from graphdistill.errors import ConfigError, ContractError, DimensionError
from graphdistill.numerics import (
    Tensor,
    add,
    add_constant,
    as_tensor,
    gather_rows,
    log_softmax,
    multiply_constant,
    reduce_sum,
    scale,
    square,
    subtract,
)


class LossValue:
    """Scalar tape node plus a per-term breakdown of plain floats"""

    __slots__ = ("node", "breakdown")

    def __init__(self, node, breakdown=None):
        self.node = node
        self.breakdown = dict(breakdown or {})

    @property
    def value(self):
        return self.node.value

    def __repr__(self):
        terms = ", ".join(f"{k}={v:.6g}" for k, v in self.breakdown.items())
        return f"LossValue({self.value:.6g}; {terms})"


def constant_loss(value, name="loss"):
    """Untracked LossValue, for assembling objectives from known terms"""
    return LossValue(Tensor(np.asarray(float(value))), {name: float(value)})


def _node(loss):
    return loss.node if isinstance(loss, LossValue) else as_tensor(loss)


def _breakdown(loss):
    return loss.breakdown if isinstance(loss, LossValue) else {}


def check_temperature(tau):
    if not 0 < tau <= 1:
        raise ConfigError(f"temperature out of range: τ ∈ (0,1], got {tau}")


def check_mixing_weight(symbol, value, allow_boundary=False):
    """λ-style weights live in (0,1), or in [0,1] for hyper-parameter sweeps"""
    if allow_boundary:
        if not 0 <= value <= 1:
            raise ConfigError(f"{symbol} out of range: {symbol} ∈ [0,1], got {value}")
    elif not 0 < value < 1:
        raise ConfigError(f"{symbol} out of range: {symbol} ∈ (0,1), got {value}")


def _mix(first, second, weight):
    """weight * first + (1 - weight) * second"""
    return add(scale(_node(first), weight), scale(_node(second), 1.0 - weight))


def ce_loss(logits, labels):
    """Mean over rows of -log softmax(logits)[label]"""
    logits = as_tensor(logits)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    rows = logits.shape[0]
    if rows == 0:
        raise ContractError("cross-entropy over zero rows")
    if labels.size != rows:
        raise DimensionError(f"{labels.size} labels for {rows} rows of logits")
    one_hot = np.zeros(logits.shape)
    one_hot[np.arange(rows), labels] = 1.0
    picked = reduce_sum(multiply_constant(log_softmax(logits), one_hot))
    node = scale(picked, -1.0 / rows)
    return LossValue(node, {"ce": node.value})


def kl_loss(teacher_logits, student_logits, tau=1.0, node_weights=None):
    """Σ_i ω_i KL(softmax(t_i/τ) || softmax(s_i/τ))

    ω_i is 1/r when ``node_weights`` is None and the supplied weight
    otherwise, with no further normalization. The teacher side is a constant.
    """
    check_temperature(tau)
    student_logits = as_tensor(student_logits)
    teacher = np.asarray(
        teacher_logits.data if isinstance(teacher_logits, Tensor) else teacher_logits,
        dtype=np.float64,
    )
    if teacher.shape != student_logits.shape:
        raise DimensionError(
            f"teacher logits {teacher.shape} vs student logits {student_logits.shape}"
        )
    rows = teacher.shape[0]
    if node_weights is None:
        weights = np.full(rows, 1.0 / rows) if rows else np.zeros(0)
    else:
        weights = np.asarray(node_weights, dtype=np.float64).reshape(-1)
        if weights.size != rows:
            raise DimensionError(f"{weights.size} node weights for {rows} rows")
        if np.any(weights < 0):
            raise ConfigError("node weights must be nonnegative")

    teacher_log_probs = special.log_softmax(teacher / tau, axis=1)
    teacher_probs = np.exp(teacher_log_probs)
    weighted_probs = weights[:, None] * teacher_probs
    negative_entropy = float(np.sum(weighted_probs * teacher_log_probs))
    cross = reduce_sum(
        multiply_constant(log_softmax(student_logits, tau), weighted_probs)
    )
    node = add_constant(scale(cross, -1.0), negative_entropy)
    return LossValue(node, {"kl": node.value})


def g2m_loss(logits, train_idx, train_labels, teacher_logits, tau, lam, allow_boundary=False):
    """λ·CE on the labelled rows + (1-λ)·KL with uniform 1/r weighting

    ``logits`` and ``teacher_logits`` cover the whole distillation domain;
    ``train_idx`` selects the labelled rows.
    """
    check_mixing_weight("λ", lam, allow_boundary)
    ce = ce_loss(gather_rows(logits, train_idx), train_labels)
    kl = kl_loss(teacher_logits, logits, tau)
    node = _mix(ce, kl, lam)
    return LossValue(node, {"ce": ce.value, "kl": kl.value, "g2m": node.value})


def rc_loss(per_student_logits, per_student_labels):
    """Mean over students of each student's CE on its own labelled subset"""
    if len(per_student_logits) != len(per_student_labels) or not per_student_logits:
        raise ContractError("rc_loss needs one label set per student")
    terms = [ce_loss(z, y) for z, y in zip(per_student_logits, per_student_labels)]
    total = terms[0].node
    for term in terms[1:]:
        total = add(total, term.node)
    node = scale(total, 1.0 / len(terms))
    breakdown = {"rc": node.value}
    breakdown.update({f"rc_{k}": t.value for k, t in enumerate(terms)})
    return LossValue(node, breakdown)


def _squared_distance(a, b):
    return reduce_sum(square(subtract(a, b)))


def na_output_loss(clean_logits, masked_logits):
    """(1/K) Σ_k (1/|V_k|) Σ_i ||z_i - z̃_i||² over raw logits"""
    if len(clean_logits) != len(masked_logits) or not clean_logits:
        raise ContractError("na_output_loss needs one masked output per student")
    total = None
    for clean, masked in zip(clean_logits, masked_logits):
        clean, masked = as_tensor(clean), as_tensor(masked)
        if clean.shape != masked.shape:
            raise DimensionError(f"clean {clean.shape} vs masked {masked.shape}")
        if clean.shape[0] == 0:
            raise ContractError("node alignment over zero rows")
        term = scale(_squared_distance(clean, masked), 1.0 / clean.shape[0])
        total = term if total is None else add(total, term)
    node = scale(total, 1.0 / len(clean_logits))
    return LossValue(node, {"na_o": node.value})


def _hidden(trace):
    return list(getattr(trace, "hidden", trace))


def na_hidden_loss(clean_traces, masked_traces, layers=None):
    """(1/K) Σ_k Σ_l Σ_i ||h - h̃||² / (|V_k| (L-1)) over hidden activations

    Traces are ForwardTrace objects or plain lists of hidden tensors.
    """
    if len(clean_traces) != len(masked_traces) or not clean_traces:
        raise ContractError("na_hidden_loss needs one masked trace per student")
    total = None
    for clean_trace, masked_trace in zip(clean_traces, masked_traces):
        clean, masked = _hidden(clean_trace), _hidden(masked_trace)
        if len(clean) != len(masked) or not clean:
            raise ContractError(
                f"trace lengths differ or are empty: {len(clean)} vs {len(masked)}"
            )
        if layers is not None and len(clean) != layers - 1:
            raise ContractError(f"expected {layers - 1} hidden layers, got {len(clean)}")
        rows = clean[0].shape[0]
        if rows == 0:
            raise ContractError("node alignment over zero rows")
        student_total = None
        for h, h_masked in zip(clean, masked):
            if h.shape != h_masked.shape:
                raise DimensionError(f"clean {h.shape} vs masked {h_masked.shape}")
            term = _squared_distance(h, h_masked)
            student_total = term if student_total is None else add(student_total, term)
        term = scale(student_total, 1.0 / (rows * len(clean)))
        total = term if total is None else add(total, term)
    node = scale(total, 1.0 / len(clean_traces))
    return LossValue(node, {"na_h": node.value})


def na_loss(na_o, na_h, lam_na, allow_boundary=False):
    """λ_NA·NA-O + (1-λ_NA)·NA-H; an ablated term (None) counts as 0

    Returns None when both terms are ablated.
    """
    check_mixing_weight("λ_NA", lam_na, allow_boundary)
    if na_o is None and na_h is None:
        return None
    breakdown = {}
    parts = []
    if na_o is not None:
        parts.append(scale(_node(na_o), lam_na))
        breakdown.update(_breakdown(na_o))
    if na_h is not None:
        parts.append(scale(_node(na_h), 1.0 - lam_na))
        breakdown.update(_breakdown(na_h))
    node = parts[0] if len(parts) == 1 else add(parts[0], parts[1])
    breakdown["na"] = node.value
    return LossValue(node, breakdown)


def adagmlp_loss(rc, adakd, na, lam, allow_boundary=False):
    """λ·RC + (1-λ)·AdaKD + NA, with NA=None meaning the term is ablated"""
    check_mixing_weight("λ", lam, allow_boundary)
    node = _mix(rc, adakd, lam)
    breakdown = {}
    breakdown.update(_breakdown(rc))
    breakdown.update(_breakdown(adakd))
    if na is not None:
        node = add(node, _node(na))
        breakdown.update(_breakdown(na))
    breakdown["total"] = node.value
    return LossValue(node, breakdown)
