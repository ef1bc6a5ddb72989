"""
adaboost.py

KD-SAMME: per-node teacher/student divergences, the weighted student error,
combining weights, node-weight updates, the stagewise cascade over students,
the boosted KD loss and ensemble inference
"""
from collections import namedtuple

import numpy as np
from scipy import special

from graphdistill.constants_distill import (
    COMBINER_ADABOOST,
    COMBINER_AVERAGE,
    COMBINER_VOTE,
    COMBINERS,
    EPS_ALPHA,
    EPS_ERROR,
)
from graphdistill.errors import ConfigError, ContractError, DimensionError
from graphdistill.numerics import Tensor, add, scale
from graphdistill.objectives import LossValue, kl_loss

StudentStats = namedtuple("StudentStats", ["error", "alpha", "raw_error"])
CascadeResult = namedtuple("CascadeResult", ["schedule", "stats", "weights"])


def _values(logits):
    if isinstance(logits, Tensor):
        return logits.data
    return np.asarray(logits, dtype=np.float64)


def uniform_weights(n):
    return np.full(n, 1.0 / n)


def divergence(teacher_logits, student_logits):
    """Per-node KL(softmax(teacher) || softmax(student)) at temperature 1"""
    teacher, student = _values(teacher_logits), _values(student_logits)
    if teacher.shape != student.shape:
        raise DimensionError(f"teacher logits {teacher.shape} vs student {student.shape}")
    teacher_log_probs = special.log_softmax(teacher, axis=1)
    student_log_probs = special.log_softmax(student, axis=1)
    d = np.sum(np.exp(teacher_log_probs) * (teacher_log_probs - student_log_probs), axis=1)
    # Roundoff can leave identical rows a hair below zero
    return np.maximum(d, 0.0)


def _check_beta(beta):
    if not beta > 0:
        raise ConfigError(f"β out of range: β ∈ (0,∞), got {beta}")


def weighted_error(w, d, beta, eps_error=EPS_ERROR, clamp=True):
    """e = Σ w_i (1 - exp(-β d_i)) / Σ w_i, clamped into [ε_e, 1 - ε_e]"""
    _check_beta(beta)
    w, d = np.asarray(w, dtype=np.float64), np.asarray(d, dtype=np.float64)
    if w.shape != d.shape:
        raise DimensionError(f"{w.size} node weights for {d.size} divergences")
    raw = float(np.sum(w * -np.expm1(-beta * d)) / np.sum(w))
    if not clamp:
        return raw
    return float(np.clip(raw, eps_error, 1.0 - eps_error))


def combining_weight(e, eps_alpha=EPS_ALPHA):
    """α = max(log((1 - e) / e), ε)"""
    return max(float(np.log((1.0 - e) / e)), eps_alpha)


def update_weights(w, alpha, d, beta):
    """w_i ← w_i exp(α (1 - exp(-β d_i))), renormalized to sum to 1"""
    w, d = np.asarray(w, dtype=np.float64), np.asarray(d, dtype=np.float64)
    updated = w * np.exp(alpha * -np.expm1(-beta * d))
    return updated / updated.sum()


def normalize_alphas(alphas):
    """ᾱ = α / Σ α"""
    alphas = np.asarray(alphas, dtype=np.float64)
    if alphas.size == 0 or np.any(alphas <= 0):
        raise ContractError(f"combining weights must be positive, got {alphas}")
    return alphas / alphas.sum()


def kd_samme_cascade(
    teacher_logits,
    per_student_logits,
    w,
    beta,
    eps_error=EPS_ERROR,
    eps_alpha=EPS_ALPHA,
    boosting=True,
):
    """One stagewise pass over the students

    Stage k sees the node weights left by stage k-1, computes its divergence,
    error and α, then reweights the nodes for stage k+1. With ``boosting``
    off every stage keeps the incoming weights and gets α = 1.

    Returns
    -------
    result : CascadeResult
        ``schedule[k]`` is the weight vector in force when stage k was
        reached, ``stats[k]`` its StudentStats and ``weights`` the vector
        after the last stage
    """
    if not per_student_logits:
        raise ContractError("the cascade needs at least one student")
    w = np.asarray(w, dtype=np.float64)
    schedule, stats = [], []
    for logits in per_student_logits:
        schedule.append(w)
        d = divergence(teacher_logits, logits)
        raw = weighted_error(w, d, beta, clamp=False)
        if not boosting:
            stats.append(StudentStats(error=raw, alpha=1.0, raw_error=raw))
            continue
        e = float(np.clip(raw, eps_error, 1.0 - eps_error))
        alpha = combining_weight(e, eps_alpha)
        stats.append(StudentStats(error=e, alpha=alpha, raw_error=raw))
        w = update_weights(w, alpha, d, beta)
    return CascadeResult(schedule=schedule, stats=stats, weights=w)


def adakd_loss(teacher_logits, per_student_logits, tau, w_schedule):
    """(1/K) Σ_k KL loss of student k under the stage-k node weights"""
    if not per_student_logits or len(per_student_logits) != len(w_schedule):
        raise ContractError("adakd_loss needs one weight vector per student")
    terms = [
        kl_loss(teacher_logits, logits, tau, w)
        for logits, w in zip(per_student_logits, w_schedule)
    ]
    total = terms[0].node
    for term in terms[1:]:
        total = add(total, term.node)
    node = scale(total, 1.0 / len(terms))
    breakdown = {"adakd": node.value}
    breakdown.update({f"kd_{k}": t.value for k, t in enumerate(terms)})
    return LossValue(node, breakdown)


def ensemble_predict(per_student_logits, alpha_bar=None, mode=COMBINER_ADABOOST):
    """Class ids from K students' logits

    adaboost: argmax of Σ_k ᾱ_k softmax(z_k); average: argmax of the mean
    softmax; vote: plurality of per-student argmaxes. Ties go to the lowest
    class index.
    """
    if mode not in COMBINERS:
        raise ConfigError(f"Unknown combiner {mode!r}, choose from {COMBINERS}")
    if not per_student_logits:
        raise ContractError("cannot predict with an empty ensemble")
    logits = [_values(z) for z in per_student_logits]
    shape = logits[0].shape
    if any(z.shape != shape for z in logits):
        raise DimensionError("students produced logits of different shapes")
    if mode == COMBINER_VOTE:
        votes = np.zeros(shape)
        rows = np.arange(shape[0])
        for z in logits:
            votes[rows, np.argmax(z, axis=1)] += 1
        return np.argmax(votes, axis=1)
    probabilities = np.stack([special.softmax(z, axis=1) for z in logits])
    if mode == COMBINER_AVERAGE:
        return np.argmax(probabilities.mean(axis=0), axis=1)
    if alpha_bar is None:
        raise ContractError("the adaboost combiner needs combining weights")
    alpha_bar = np.asarray(alpha_bar, dtype=np.float64)
    if alpha_bar.shape != (len(logits),):
        raise DimensionError(f"{alpha_bar.size} weights for {len(logits)} students")
    return np.argmax(np.tensordot(alpha_bar, probabilities, axes=1), axis=1)
