"""
optim.py

Adam with decoupled weight decay and patience-based early stopping
"""
import numpy as np

from graphdistill.constants_distill import ADAM_BETAS, ADAM_EPS
from graphdistill.errors import DimensionError
from graphdistill.log_utils import get_logger

logger = get_logger(__file__)


class AdamState:
    """First and second moments per parameter id, plus the step counter"""

    def __init__(self, parameters=()):
        self.step = 0
        self.m = {p.id: np.zeros(p.shape) for p in parameters}
        self.v = {p.id: np.zeros(p.shape) for p in parameters}


def adam_step(
    params, grads, state, lr, weight_decay=0.0, betas=ADAM_BETAS, eps=ADAM_EPS
):
    """One Adam update of every parameter in ``params``

    Weight decay is decoupled: θ ← θ - lr·wd·θ happens before the moment
    step. Parameters are replaced through ``Parameter.assign``.

    Parameters
    ----------
    params : list of Parameter
    grads : dict
        Parameter id -> gradient array
    state : AdamState
        Updated in place and returned
    lr, weight_decay, eps : float
    betas : tuple of float

    Returns
    -------
    state : AdamState
    """
    beta1, beta2 = betas
    state.step += 1
    bias1 = 1.0 - beta1 ** state.step
    bias2 = 1.0 - beta2 ** state.step
    for p in params:
        grad = grads[p.id]
        m = state.m.setdefault(p.id, np.zeros(p.shape))
        v = state.v.setdefault(p.id, np.zeros(p.shape))
        if grad.shape != p.shape or m.shape != p.shape:
            raise DimensionError(f"Adam state for {p.id} does not match {p.shape}")
        theta = p.data * (1.0 - lr * weight_decay) if weight_decay else p.data.copy()
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        state.m[p.id], state.v[p.id] = m, v
        theta -= lr * (m / bias1) / (np.sqrt(v / bias2) + eps)
        p.assign(theta)
    return state


class EarlyStopping:
    """Track the best validation accuracy and count epochs without improvement

    Only a strictly better score counts as an improvement, so the earliest
    epoch wins ties.
    """

    def __init__(self, patience):
        self.patience = patience
        self.counter = 0
        self.best_score = None
        self.best_epoch = None
        self.early_stop = False

    def __call__(self, score, epoch):
        """Record ``score`` for ``epoch``; returns True when it is a new best"""
        if self.best_score is None or score > self.best_score:
            self.best_score = score
            self.best_epoch = epoch
            self.counter = 0
            return True
        self.counter += 1
        if self.counter >= self.patience:
            logger.debug(
                f"Early stopping at epoch {epoch}, best epoch {self.best_epoch}"
            )
            self.early_stop = True
        return False
