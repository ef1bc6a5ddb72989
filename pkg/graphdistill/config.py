"""
config.py

Validated hyper-parameter sets for teacher training and distillation.
JSON keys are snake_case (``lambda`` for λ); command line flags are the
kebab-case spelling of the same key.
"""
import json
from dataclasses import asdict, dataclass, fields, replace

from graphdistill.constants_distill import (
    DEFAULT_BETA,
    DEFAULT_K,
    DEFAULT_LAMBDA,
    DEFAULT_LAMBDA_NA,
    DEFAULT_LOG_EVERY,
    DEFAULT_MAX_EPOCHS,
    DEFAULT_PATIENCE,
    DEFAULT_RHO,
    DEFAULT_STUDENT_DROPOUT,
    DEFAULT_STUDENT_LR,
    DEFAULT_STUDENT_WEIGHT_DECAY,
    DEFAULT_TAU,
    DEFAULT_TEACHER_DROPOUT,
    DEFAULT_TEACHER_HIDDEN,
    DEFAULT_TEACHER_LAYERS,
    DEFAULT_TEACHER_LR,
    DEFAULT_TEACHER_MAX_EPOCHS,
    DEFAULT_TEACHER_PATIENCE,
    DEFAULT_TEACHER_WEIGHT_DECAY,
    EPS_ALPHA,
    EPS_ERROR,
)
from graphdistill.errors import ConfigError, ParseError
from graphdistill.objectives import check_mixing_weight, check_temperature

# JSON spellings that differ from the attribute name
JSON_ALIASES = {"lambda": "lambda_", "K": "k"}


def _normalize_keys(data, cls):
    names = {f.name for f in fields(cls)}
    normalized = {}
    for key, value in data.items():
        key = key.replace("-", "_")
        key = JSON_ALIASES.get(key, key)
        if key not in names:
            raise ConfigError(f"Unknown {cls.__name__} key {key!r}")
        normalized[key] = value
    return normalized


def _check_common(config):
    if not 0 <= config.dropout < 1:
        raise ConfigError(f"dropout must be in [0,1), got {config.dropout}")
    if not config.lr > 0:
        raise ConfigError(f"lr must be positive, got {config.lr}")
    if config.weight_decay < 0:
        raise ConfigError(f"weight_decay must be nonnegative, got {config.weight_decay}")
    if config.max_epochs < 0:
        raise ConfigError(f"max_epochs must be nonnegative, got {config.max_epochs}")
    if config.patience < 1:
        raise ConfigError(f"patience must be at least 1, got {config.patience}")
    if config.seed < 0:
        raise ConfigError(f"seed must be nonnegative, got {config.seed}")
    if config.log_every < 1:
        raise ConfigError(f"log_every must be at least 1, got {config.log_every}")


class _ConfigMixin:
    @classmethod
    def from_dict(cls, data):
        return cls(**_normalize_keys(data or {}, cls))

    def to_dict(self):
        data = asdict(self)
        for alias, name in JSON_ALIASES.items():
            if name in data and alias != "K":
                data[alias] = data.pop(name)
        return data

    def replace(self, **changes):
        return replace(self, **_normalize_keys(changes, type(self)))


@dataclass(frozen=True)
class TeacherConfig(_ConfigMixin):
    layers: int = DEFAULT_TEACHER_LAYERS
    hidden: int = DEFAULT_TEACHER_HIDDEN
    dropout: float = DEFAULT_TEACHER_DROPOUT
    lr: float = DEFAULT_TEACHER_LR
    weight_decay: float = DEFAULT_TEACHER_WEIGHT_DECAY
    max_epochs: int = DEFAULT_TEACHER_MAX_EPOCHS
    patience: int = DEFAULT_TEACHER_PATIENCE
    seed: int = 0
    log_every: int = DEFAULT_LOG_EVERY

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.layers < 1:
            raise ConfigError(f"the teacher needs at least one layer, got {self.layers}")
        if self.hidden < 1:
            raise ConfigError(f"hidden width must be positive, got {self.hidden}")
        _check_common(self)


@dataclass(frozen=True)
class DistillConfig(_ConfigMixin):
    """Every distillation hyper-parameter, ablation switch and seed

    ``layers`` and ``hidden`` default to None, meaning the students copy
    the teacher's depth and width.
    """

    lambda_: float = DEFAULT_LAMBDA
    lambda_na: float = DEFAULT_LAMBDA_NA
    beta: float = DEFAULT_BETA
    tau: float = DEFAULT_TAU
    rho: float = DEFAULT_RHO
    k: int = DEFAULT_K
    layers: int = None
    hidden: int = None
    dropout: float = DEFAULT_STUDENT_DROPOUT
    lr: float = DEFAULT_STUDENT_LR
    weight_decay: float = DEFAULT_STUDENT_WEIGHT_DECAY
    max_epochs: int = DEFAULT_MAX_EPOCHS
    patience: int = DEFAULT_PATIENCE
    seed: int = 0
    na_enabled: bool = True
    na_o_enabled: bool = True
    na_h_enabled: bool = True
    rc_enabled: bool = True
    adakd_enabled: bool = True
    sweep_mode: bool = False
    resample_rc_each_epoch: bool = False
    share_na_dropout: bool = False
    carry_node_weights: bool = False
    student_seeds: tuple = None
    eps_alpha: float = EPS_ALPHA
    eps_error: float = EPS_ERROR
    log_every: int = DEFAULT_LOG_EVERY

    def __post_init__(self):
        if self.student_seeds is not None:
            object.__setattr__(
                self, "student_seeds", tuple(int(s) for s in self.student_seeds)
            )
        self.validate()

    def validate(self):
        check_mixing_weight("λ", self.lambda_, self.sweep_mode)
        check_mixing_weight("λ_NA", self.lambda_na, self.sweep_mode)
        check_temperature(self.tau)
        if not self.beta > 0:
            raise ConfigError(f"β out of range: β ∈ (0,∞), got {self.beta}")
        if not 0 <= self.rho < 1:
            raise ConfigError(f"ρ out of range: ρ ∈ [0,1), got {self.rho}")
        if self.k < 1:
            raise ConfigError(f"K must be at least 1, got {self.k}")
        if self.layers is not None and self.layers < 2:
            raise ConfigError(f"students need L >= 2 layers, got {self.layers}")
        if self.hidden is not None and self.hidden < 1:
            raise ConfigError(f"hidden width must be positive, got {self.hidden}")
        if self.na_enabled != (self.na_o_enabled or self.na_h_enabled):
            raise ConfigError(
                "na_enabled must be true exactly when na_o_enabled or na_h_enabled is"
            )
        if self.student_seeds is not None and len(self.student_seeds) != self.k:
            raise ConfigError(
                f"{len(self.student_seeds)} student seeds for K={self.k} students"
            )
        if not 0 < self.eps_error < 0.5:
            raise ConfigError(f"eps_error must be in (0, 0.5), got {self.eps_error}")
        if not self.eps_alpha > 0:
            raise ConfigError(f"eps_alpha must be positive, got {self.eps_alpha}")
        _check_common(self)

    def ablate(self, **flags):
        """Switch ablation flags off and keep na_enabled consistent"""
        changes = dict(flags)
        na_o = changes.get("na_o_enabled", self.na_o_enabled)
        na_h = changes.get("na_h_enabled", self.na_h_enabled)
        if changes.get("na_enabled") is False:
            na_o = na_h = False
        changes.update(na_o_enabled=na_o, na_h_enabled=na_h, na_enabled=na_o or na_h)
        return self.replace(**changes)

    def student_architecture(self, teacher_layers, teacher_hidden):
        """(layers, hidden) of every student, copying the teacher by default"""
        layers = self.layers if self.layers is not None else max(teacher_layers, 2)
        hidden = self.hidden if self.hidden is not None else teacher_hidden
        return layers, hidden


def load_config(cls, path=None, section=None, **overrides):
    """Defaults < JSON file values < non-None flag overrides

    A file may hold the fields directly or nest them under ``section``
    ("teacher" or "distill"), the same layout an experiment spec uses.
    """
    data = {}
    if path is not None:
        try:
            with open(path) as f:
                data = json.load(f)
        except json.JSONDecodeError as error:
            raise ParseError(error.msg, path, error.lineno)
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must hold a JSON object")
        if section is not None and section in data:
            data = data[section]
    data = dict(data)
    data.update({key: value for key, value in overrides.items() if value is not None})
    return cls.from_dict(data)
